#pragma once

#include "algebra.hpp"
#include "connection.hpp"
#include "hitchin.hpp"
#include "io.hpp"
#include "isoflow.hpp"
#include "jet.hpp"
#include "monodromy.hpp"
#include "ode.hpp"
#include "random.hpp"
#include "wstructures.hpp"
