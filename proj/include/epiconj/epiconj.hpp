#pragma once

#include "epiconj/baseline.hpp"
#include "epiconj/epiproject.hpp"
#include "epiconj/model.hpp"
#include "epiconj/polyproj.hpp"
#include "epiconj/problem_file.hpp"
#include "epiconj/problems.hpp"
#include "epiconj/solver.hpp"
#include "epiconj/trace_io.hpp"
