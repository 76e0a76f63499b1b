#pragma once

#include "stage/num/param_store.hpp"
#include "stage/wire/bytes.hpp"

namespace stage::wire {

// Full-precision ParamStore blob: entry count, then per entry (name-ordered)
// name, shape, row-major f64 values. Gradients are transient and not stored.
void write_param_store(ByteWriter& w, const num::ParamStore& params);
num::ParamStore read_param_store(ByteReader& r);

}  // namespace stage::wire
