#pragma once

#include "seqbh/config.hpp"
#include "seqbh/errors.hpp"
#include "seqbh/exp_family.hpp"
#include "seqbh/fixed_sample.hpp"
#include "seqbh/glr.hpp"
#include "seqbh/ladder.hpp"
#include "seqbh/monte_carlo.hpp"
#include "seqbh/mvnormal.hpp"
#include "seqbh/procedure.hpp"
#include "seqbh/replay.hpp"
#include "seqbh/report.hpp"
#include "seqbh/rng.hpp"
#include "seqbh/standardizer.hpp"
#include "seqbh/stream_model.hpp"
#include "seqbh/two_sample_binomial.hpp"

