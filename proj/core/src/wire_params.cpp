#include "stage/wire/params.hpp"

namespace stage::wire {

void write_param_store(ByteWriter& w, const num::ParamStore& params) {
  w.u32(static_cast<std::uint32_t>(params.entry_count()));
  for (const auto& [name, entry] : params) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()});
    w.u32(static_cast<std::uint32_t>(entry.value.rows()));
    w.u32(static_cast<std::uint32_t>(entry.value.cols()));
    for (double v : entry.value.values()) w.f64(v);
  }
}

num::ParamStore read_param_store(ByteReader& r) {
  num::ParamStore params;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    const auto name_bytes = r.raw(name_len);
    const std::string name(name_bytes.begin(), name_bytes.end());
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    auto& value = params.create(name, rows, cols);
    for (double& v : value.values()) v = r.f64();
  }
  return params;
}

}  // namespace stage::wire
