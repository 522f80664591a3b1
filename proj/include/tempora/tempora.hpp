#pragma once

#include "tempora/analysis.hpp"
#include "tempora/commands.hpp"
#include "tempora/composer.hpp"
#include "tempora/corpus.hpp"
#include "tempora/error.hpp"
#include "tempora/eval.hpp"
#include "tempora/features.hpp"
#include "tempora/model_file.hpp"
#include "tempora/models.hpp"
#include "tempora/random.hpp"
