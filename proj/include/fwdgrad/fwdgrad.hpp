#pragma once

#include "fwdgrad/bounds.hpp"
#include "fwdgrad/dual.hpp"
#include "fwdgrad/forward_gradient.hpp"
#include "fwdgrad/optim.hpp"
#include "fwdgrad/problems.hpp"
#include "fwdgrad/prox.hpp"
#include "fwdgrad/random.hpp"
