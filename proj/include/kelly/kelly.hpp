#pragma once

#include "kelly/constraint_system.hpp"
#include "kelly/error.hpp"
#include "kelly/kkt_solver.hpp"
#include "kelly/pipeline.hpp"
#include "kelly/portfolio_io.hpp"
#include "kelly/portfolio_model.hpp"
#include "kelly/portfolio_stats.hpp"
#include "kelly/reference_oracle.hpp"
#include "kelly/report_render.hpp"
