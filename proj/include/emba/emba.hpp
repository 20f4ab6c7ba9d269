#pragma once

#include "assignment.hpp"
#include "bounds.hpp"
#include "core.hpp"
#include "cover_tree.hpp"
#include "dataset.hpp"
#include "embedding.hpp"
#include "exact_ged.hpp"
#include "metric_tree.hpp"
#include "search.hpp"
#include "ultrametric.hpp"
