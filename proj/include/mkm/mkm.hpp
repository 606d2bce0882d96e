#pragma once

#include "error.hpp"
#include "quadrature.hpp"
#include "kernel.hpp"
#include "model.hpp"
#include "spectral.hpp"
#include "grid.hpp"
#include "operators.hpp"
#include "evolution.hpp"
#include "selfsimilar.hpp"
#include "moments.hpp"
#include "transforms.hpp"
#include "config.hpp"
#include "verify.hpp"
#include "cli.hpp"
