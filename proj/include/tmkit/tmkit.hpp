#pragma once

#include "tmkit/core.hpp"
#include "tmkit/decimal.hpp"
#include "tmkit/diagnostic.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/engine.hpp"
#include "tmkit/eval.hpp"
#include "tmkit/render.hpp"
#include "tmkit/temporal.hpp"
#include "tmkit/time.hpp"
#include "tmkit/validate.hpp"
