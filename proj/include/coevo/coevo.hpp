#pragma once

#include "coevo/config.hpp"
#include "coevo/graph.hpp"
#include "coevo/io.hpp"
#include "coevo/model.hpp"
#include "coevo/runner.hpp"
#include "coevo/simulation.hpp"
#include "coevo/state_matrix.hpp"
