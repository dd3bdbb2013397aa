#pragma once

#include "simpfact/classifier/evaluate.hpp"
#include "simpfact/classifier/features.hpp"
#include "simpfact/classifier/model.hpp"
#include "simpfact/classifier/train.hpp"
