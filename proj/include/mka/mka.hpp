#pragma once

// Umbrella header for the MKA library: multiresolution core-diagonal
// compression of symmetric positive semi-definite kernel matrices, factored
// operators on the compressed form, and GP regression on top of it.

#include "mka/matrix.hpp"
#include "mka/givens.hpp"
#include "mka/evd.hpp"
#include "mka/cholesky.hpp"
#include "mka/rng.hpp"
#include "mka/clustering.hpp"
#include "mka/compressor.hpp"
#include "mka/parallel.hpp"
#include "mka/factorization.hpp"
#include "mka/serialization.hpp"
#include "mka/gp.hpp"
#include "mka/metrics.hpp"
#include "mka/io.hpp"
#include "mka/bench.hpp"
