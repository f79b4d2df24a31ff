#pragma once

// Everything except the JSON layer (io.hpp), which needs nlohmann/json on the include path.

#include <whitney/error.hpp>
#include <whitney/multiindex.hpp>
#include <whitney/taylor.hpp>
#include <whitney/smooth.hpp>
#include <whitney/expr.hpp>
#include <whitney/jet.hpp>
#include <whitney/decomp.hpp>
#include <whitney/pou.hpp>
#include <whitney/extend.hpp>
#include <whitney/fdb.hpp>
#include <whitney/atlas.hpp>
#include <whitney/parallel.hpp>
