#pragma once

#include "assocdb/assoc.hpp"
#include "assocdb/bench.hpp"
#include "assocdb/connector.hpp"
#include "assocdb/errors.hpp"
#include "assocdb/graphgen.hpp"
#include "assocdb/keyspec.hpp"
#include "assocdb/kvstore.hpp"
#include "assocdb/number.hpp"
#include "assocdb/tsv.hpp"
