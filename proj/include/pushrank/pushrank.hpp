#pragma once

#include "pushrank/digest.hpp"
#include "pushrank/format.hpp"
#include "pushrank/graph.hpp"
#include "pushrank/hubs.hpp"
#include "pushrank/oracle.hpp"
#include "pushrank/patch.hpp"
#include "pushrank/push.hpp"
#include "pushrank/sparse_vector.hpp"
#include "pushrank/types.hpp"
