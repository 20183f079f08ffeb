#pragma once

#include "hessianlab/error.hpp"
#include "hessianlab/parallel.hpp"
#include "hessianlab/symfunc.hpp"
#include "hessianlab/cone_inequalities.hpp"
#include "hessianlab/hermlin.hpp"
#include "hessianlab/geometry.hpp"
#include "hessianlab/operator.hpp"
#include "hessianlab/krylov.hpp"
#include "hessianlab/solver.hpp"
#include "hessianlab/envelope.hpp"
#include "hessianlab/inequalities.hpp"
