#pragma once

#include "crossrate/common.hpp"
#include "crossrate/corpus.hpp"
#include "crossrate/textproc.hpp"
#include "crossrate/tagger.hpp"
#include "crossrate/lexicon.hpp"
#include "crossrate/aspects.hpp"
#include "crossrate/embeddings.hpp"
#include "crossrate/models.hpp"
#include "crossrate/eval.hpp"
#include "crossrate/synth.hpp"
#include "crossrate/config.hpp"
