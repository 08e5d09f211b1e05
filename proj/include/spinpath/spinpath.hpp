#pragma once

#include "spinpath/clt.hpp"
#include "spinpath/config.hpp"
#include "spinpath/csv.hpp"
#include "spinpath/decomposition.hpp"
#include "spinpath/disorder.hpp"
#include "spinpath/enumerate.hpp"
#include "spinpath/errors.hpp"
#include "spinpath/gibbs.hpp"
#include "spinpath/ibp.hpp"
#include "spinpath/parallel.hpp"
#include "spinpath/path.hpp"
#include "spinpath/perceptron_constants.hpp"
#include "spinpath/perceptron_path.hpp"
#include "spinpath/potential.hpp"
#include "spinpath/quadrature.hpp"
#include "spinpath/rng.hpp"
#include "spinpath/sk_constants.hpp"
#include "spinpath/spin.hpp"
#include "spinpath/stats.hpp"
