#pragma once

#include "simpfact/perturb/dataset.hpp"
#include "simpfact/perturb/example.hpp"
#include "simpfact/perturb/generators.hpp"
#include "simpfact/perturb/masked_lm.hpp"
