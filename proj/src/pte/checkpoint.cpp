// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/pte/checkpoint.hpp"

#include <cmath>
#include <fstream>

#include "anticipate/datastore/feature_pack.hpp"
#include "anticipate/datastore/jsonl.hpp"
#include "anticipate/errors.hpp"
#include "anticipate/pte/model.hpp"

namespace anticipate::pte {

std::filesystem::path checkpoint_sidecar(const std::filesystem::path& pack_path) {
  auto p = pack_path;
  p.replace_extension(".json");
  return p;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& pack_path, const PTEConfig& config,
                     const numcore::ParamStore<T>& params, const nlohmann::ordered_json& extra) {
  std::vector<float> values;
  values.reserve(params.scalar_count());
  std::vector<datastore::FeaturePack::IndexEntry> index;
  nlohmann::ordered_json shapes = nlohmann::ordered_json::object();
  for (const auto& [name, entry] : params.entries()) {
    index.push_back({name, static_cast<std::uint32_t>(values.size())});
    for (T v : entry.value.values()) {
      const auto f = static_cast<float>(v);
      if (!std::isfinite(f)) throw NumericError("parameter '" + name + "' is not representable as a finite f32");
      values.push_back(f);
    }
    shapes[name] = entry.value.shape();
  }
  datastore::write_feature_pack(datastore::FeaturePack(1, std::move(values), std::move(index)), pack_path);

  nlohmann::ordered_json meta;
  meta["format"] = "anticipate-checkpoint";
  meta["version"] = 1;
  meta["model"] = to_json(config);
  meta["shapes"] = shapes;
  meta["extra"] = extra;
  const auto side = checkpoint_sidecar(pack_path);
  std::ofstream out(side, std::ios::binary);
  if (!out) throw IoError("cannot open '" + side.string() + "' for writing");
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + side.string() + "'");
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& pack_path) {
  const auto side = checkpoint_sidecar(pack_path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(datastore::read_text_file(side));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(side.string() + ": " + e.what());
  }
  if (!meta.is_object() || meta.value("format", "") != "anticipate-checkpoint") {
    throw FormatError(side.string() + ": not a checkpoint sidecar");
  }
  Checkpoint<T> ck;
  ck.config = pte_config_from_json(meta.at("model"));
  ck.config.validate();
  if (meta.contains("extra")) ck.extra = meta["extra"];
  const auto pack = datastore::read_feature_pack(pack_path);
  if (pack.row_count() > 0 && pack.dim() != 1) throw FormatError(pack_path.string() + ": checkpoint packs have dim 1");
  const auto& shapes = meta.at("shapes");
  if (shapes.size() != pack.index().size()) {
    throw FormatError(pack_path.string() + ": sidecar lists " + std::to_string(shapes.size()) +
                      " parameters, pack has " + std::to_string(pack.index().size()));
  }
  for (const auto& e : pack.index()) {
    if (!shapes.contains(e.key)) throw FormatError("parameter '" + e.key + "' has no shape in the sidecar");
    const auto shape = shapes[e.key].get<numcore::Shape>();
    const auto n = numcore::shape_size(shape);
    if (static_cast<std::size_t>(e.row) + n > pack.row_count()) {
      throw LengthError("parameter '" + e.key + "' extends past the end of the checkpoint");
    }
    std::vector<T> values(n);
    const auto all = pack.values();
    for (std::size_t i = 0; i < n; ++i) values[i] = static_cast<T>(all[e.row + i]);
    ck.params.add(e.key, numcore::Tensor<T>(shape, std::move(values)));
  }
  const auto expected = init_params(ck.config, 0);
  if (expected.names() != ck.params.names()) {
    throw FormatError(pack_path.string() + ": parameter names do not match the model configuration");
  }
  for (const auto& name : expected.names()) {
    if (expected.value(name).shape() != ck.params.value(name).shape()) {
      throw FormatError("parameter '" + name + "' has shape " +
                        numcore::shape_to_string(ck.params.value(name).shape()) + ", config implies " +
                        numcore::shape_to_string(expected.value(name).shape()));
    }
  }
  return ck;
}

template void save_checkpoint<float>(const std::filesystem::path&, const PTEConfig&, const numcore::ParamStore<float>&,
                                     const nlohmann::ordered_json&);
template void save_checkpoint<double>(const std::filesystem::path&, const PTEConfig&,
                                      const numcore::ParamStore<double>&, const nlohmann::ordered_json&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace anticipate::pte
