#pragma once

#include "claimrev/corpus.hpp"
#include "claimrev/embx.hpp"
#include "claimrev/error.hpp"
#include "claimrev/eval.hpp"
#include "claimrev/features.hpp"
#include "claimrev/ingest.hpp"
#include "claimrev/io.hpp"
#include "claimrev/matrix.hpp"
#include "claimrev/sampler.hpp"
#include "claimrev/svm.hpp"
#include "claimrev/synth.hpp"
#include "claimrev/tasks.hpp"
#include "claimrev/text.hpp"
#include "claimrev/time.hpp"
