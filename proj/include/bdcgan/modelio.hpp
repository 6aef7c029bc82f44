/* Copyright 2026 The bdcgan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BDCGAN_MODELIO_HPP_
#define BDCGAN_MODELIO_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bdcgan/bytes.hpp"
#include "bdcgan/errors.hpp"
#include "bdcgan/generator.hpp"

namespace bdcgan {

// Model file layout, all integers little-endian:
//
//   "BDCG"  u32 version  u64 payload_size  u32 crc32(payload)  payload
//
// payload:
//   scenario  str name, u8 input_as_integer, i32 A, u8 bfc, bbna1, bdeconv1, bbna2, bdeconv2
//   arch      8 x u32 (z_dim, classes, fc_units, proj_channels, base_size,
//                      deconv_filters, d_conv1_filters, d_conv2_filters)
//   u32 layer count, then per layer:
//     u8 kind (1 fc, 2 batchnorm, 3 deconv), str name, u8 binarized, f64 eps
//     (batchnorm only), u32 tensor count, then per tensor:
//       str name, u8 rank, u32 dims[rank], f32 data[]
//
// str is u16 length + bytes.
inline constexpr char kModelMagic[4] = {'B', 'D', 'C', 'G'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

enum class LayerKind : std::uint8_t { kFc = 1, kBatchNorm = 2, kDeconv = 3 };

inline void write_tensor(ByteWriter& w, const std::string& name, const FloatTensor& t) {
  w.str(name);
  w.u8(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
  for (float v : t.data()) w.f32(v);
}

inline std::pair<std::string, FloatTensor> read_tensor(ByteReader& r) {
  std::string name = r.str();
  const std::size_t rank = r.u8();
  if (rank == 0) throw FormatError("tensor " + name + " has rank 0");
  Shape shape(rank);
  std::size_t count = 1;
  for (auto& d : shape) {
    d = r.u32();
    if (d == 0) throw FormatError("tensor " + name + " has a zero extent");
    count *= d;
    if (count > r.remaining()) throw FormatError("truncated data");
  }
  std::vector<float> data(count);
  for (auto& v : data) v = r.f32();
  return {std::move(name), FloatTensor(std::move(shape), std::move(data))};
}

inline void write_scenario(ByteWriter& w, const ScenarioConfig& s) {
  w.str(s.name);
  w.u8(s.input_as_integer);
  w.i32(s.a);
  w.u8(s.bfc);
  w.u8(s.bbna1);
  w.u8(s.bdeconv1);
  w.u8(s.bbna2);
  w.u8(s.bdeconv2);
}

inline ScenarioConfig read_scenario(ByteReader& r) {
  ScenarioConfig s;
  s.name = r.str();
  s.input_as_integer = r.u8() != 0;
  s.a = r.i32();
  s.bfc = r.u8() != 0;
  s.bbna1 = r.u8() != 0;
  s.bdeconv1 = r.u8() != 0;
  s.bbna2 = r.u8() != 0;
  s.bdeconv2 = r.u8() != 0;
  if (s.input_as_integer && s.a < 1) throw FormatError("scenario A value must be >= 1");
  return s;
}

inline void write_arch(ByteWriter& w, const Architecture& a) {
  for (std::size_t v : {a.z_dim, a.num_classes, a.fc_units, a.proj_channels, a.base_size, a.deconv_filters,
                        a.d_conv1_filters, a.d_conv2_filters})
    w.u32(static_cast<std::uint32_t>(v));
}

inline Architecture read_arch(ByteReader& r) {
  Architecture a;
  for (std::size_t* v : {&a.z_dim, &a.num_classes, &a.fc_units, &a.proj_channels, &a.base_size,
                         &a.deconv_filters, &a.d_conv1_filters, &a.d_conv2_filters}) {
    *v = r.u32();
    if (*v == 0) throw FormatError("architecture has a zero dimension");
  }
  return a;
}

using TensorMap = std::map<std::string, FloatTensor>;

inline FloatTensor take(TensorMap& m, const std::string& layer, const std::string& name, const Shape& want,
                        bool optional = false) {
  auto it = m.find(name);
  if (it == m.end()) {
    if (optional) return {};
    throw FormatError("layer " + layer + " is missing tensor " + name);
  }
  if (it->second.shape() != want)
    throw FormatError("tensor " + layer + "." + name + " has shape " + to_string(it->second.shape()) +
                      ", expected " + to_string(want));
  FloatTensor t = std::move(it->second);
  m.erase(it);
  return t;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_model(const Generator& m) {
  using detail::LayerKind;
  ByteWriter p;
  detail::write_scenario(p, m.scenario);
  detail::write_arch(p, m.arch);
  p.u32(7);
  auto fc = [&](const std::string& name, const FcLayer<float>& l) {
    p.u8(static_cast<std::uint8_t>(LayerKind::kFc));
    p.str(name);
    p.u8(l.binarized);
    p.u32(l.has_bias() ? 2 : 1);
    detail::write_tensor(p, "w", l.weight);
    if (l.has_bias()) detail::write_tensor(p, "b", l.bias);
  };
  auto bn = [&](const std::string& name, const BatchNormLayer<float>& l) {
    p.u8(static_cast<std::uint8_t>(LayerKind::kBatchNorm));
    p.str(name);
    p.u8(l.binarized);
    p.f64(l.eps);
    p.u32(4);
    detail::write_tensor(p, "gamma", l.gamma);
    detail::write_tensor(p, "beta", l.beta);
    detail::write_tensor(p, "mean", l.running_mean);
    detail::write_tensor(p, "var", l.running_var);
  };
  auto deconv = [&](const std::string& name, const DeconvLayer<float>& l) {
    p.u8(static_cast<std::uint8_t>(LayerKind::kDeconv));
    p.str(name);
    p.u8(l.binarized);
    p.u32(l.has_bias() ? 2 : 1);
    detail::write_tensor(p, "w", l.weight);
    if (l.has_bias()) detail::write_tensor(p, "b", l.bias);
  };
  fc("fc1", m.fc1);
  bn("bna1", m.bna1);
  fc("fc2", m.fc2);
  bn("bna1b", m.bna1b);
  deconv("deconv1", m.deconv1);
  bn("bna2", m.bna2);
  deconv("deconv2", m.deconv2);

  const auto payload = p.take();
  ByteWriter out;
  out.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(kModelMagic), 4));
  out.u32(kModelVersion);
  out.u64(payload.size());
  out.u32(crc32_of(payload));
  out.raw(payload);
  return out.take();
}

inline Generator deserialize_model(std::span<const std::uint8_t> bytes) {
  using detail::LayerKind;
  ByteReader head(bytes);
  const auto magic = head.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kModelMagic)) throw FormatError("not a model file (bad magic)");
  const std::uint32_t version = head.u32();
  if (version != kModelVersion)
    throw VersionError("unsupported model file version " + std::to_string(version) + " (expected " +
                       std::to_string(kModelVersion) + ")");
  const std::uint64_t size = head.u64();
  const std::uint32_t crc = head.u32();
  if (head.remaining() < size) throw FormatError("truncated model file");
  if (head.remaining() > size) throw FormatError("trailing bytes after model payload");
  const auto payload = head.raw(static_cast<std::size_t>(size));
  if (crc32_of(payload) != crc) throw FormatError("model file checksum mismatch");

  ByteReader r(payload);
  Generator m;
  m.scenario = detail::read_scenario(r);
  m.arch = detail::read_arch(r);
  const Architecture& a = m.arch;
  const std::uint32_t layers = r.u32();
  if (layers != 7) throw FormatError("expected 7 generator layers, found " + std::to_string(layers));

  struct Raw {
    LayerKind kind;
    bool binarized;
    double eps;
    detail::TensorMap tensors;
  };
  std::map<std::string, Raw> raw;
  for (std::uint32_t i = 0; i < layers; ++i) {
    Raw l;
    const std::uint8_t kind = r.u8();
    if (kind < 1 || kind > 3) throw FormatError("unknown layer kind " + std::to_string(kind));
    l.kind = static_cast<LayerKind>(kind);
    std::string name = r.str();
    l.binarized = r.u8() != 0;
    l.eps = l.kind == LayerKind::kBatchNorm ? r.f64() : 0.0;
    const std::uint32_t n = r.u32();
    for (std::uint32_t j = 0; j < n; ++j) l.tensors.insert(detail::read_tensor(r));
    raw[name] = std::move(l);
  }
  if (r.remaining() != 0) throw FormatError("unexpected bytes after layer records");

  auto layer = [&](const std::string& name, LayerKind kind) -> Raw& {
    auto it = raw.find(name);
    if (it == raw.end() || it->second.kind != kind) throw FormatError("missing or mistyped layer " + name);
    return it->second;
  };
  auto fc = [&](const std::string& name, std::size_t out, std::size_t in) {
    Raw& l = layer(name, LayerKind::kFc);
    FcLayer<float> f;
    f.binarized = l.binarized;
    f.weight = detail::take(l.tensors, name, "w", {out, in});
    f.bias = detail::take(l.tensors, name, "b", {out}, true);
    return f;
  };
  auto bn = [&](const std::string& name, std::size_t c) {
    Raw& l = layer(name, LayerKind::kBatchNorm);
    BatchNormLayer<float> b;
    b.binarized = l.binarized;
    b.eps = l.eps;
    b.gamma = detail::take(l.tensors, name, "gamma", {c});
    b.beta = detail::take(l.tensors, name, "beta", {c});
    b.running_mean = detail::take(l.tensors, name, "mean", {c});
    b.running_var = detail::take(l.tensors, name, "var", {c});
    return b;
  };
  auto deconv = [&](const std::string& name, std::size_t in, std::size_t out) {
    Raw& l = layer(name, LayerKind::kDeconv);
    DeconvLayer<float> d;
    d.binarized = l.binarized;
    d.weight = detail::take(l.tensors, name, "w", {in, out, 5, 5});
    d.bias = detail::take(l.tensors, name, "b", {out}, true);
    return d;
  };
  m.fc1 = fc("fc1", a.fc_units, a.input_features());
  m.bna1 = bn("bna1", a.fc_units);
  m.fc2 = fc("fc2", a.proj_features(), a.fc_units);
  m.bna1b = bn("bna1b", a.proj_features());
  m.deconv1 = deconv("deconv1", a.proj_channels, a.deconv_filters);
  m.bna2 = bn("bna2", a.deconv_filters);
  m.deconv2 = deconv("deconv2", a.deconv_filters, 1);
  return m;
}

inline void save_model(const Generator& m, const std::string& path) { write_file(path, serialize_model(m)); }

inline Generator load_model(const std::string& path) { return deserialize_model(read_file(path)); }

// Bitwise equality of every tensor, flag and dimension.
inline bool models_identical(const Generator& a, const Generator& b) {
  return serialize_model(a) == serialize_model(b);
}

}  // namespace bdcgan

#endif  // BDCGAN_MODELIO_HPP_
