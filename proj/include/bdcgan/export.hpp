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

#ifndef BDCGAN_EXPORT_HPP_
#define BDCGAN_EXPORT_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bdcgan/binkernels.hpp"
#include "bdcgan/bytes.hpp"
#include "bdcgan/generator.hpp"
#include "bdcgan/layers/batchnorm.hpp"
#include "bdcgan/modelio.hpp"
#include "bdcgan/rng.hpp"

namespace bdcgan {

// +-1 matrix in 32-bit words: ceil(cols / 32) words per row, column c of a row
// at bit c % 32 of word c / 32, bit = 1 for +1, pad bits 0.
struct PackedWeights {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> words;

  std::size_t words_per_row() const { return words_for(cols, 32); }
  bool bit(std::size_t r, std::size_t c) const { return (words[r * words_per_row() + c / 32] >> (c % 32)) & 1u; }
  void flip(std::size_t r, std::size_t c) { words[r * words_per_row() + c / 32] ^= std::uint32_t{1} << (c % 32); }

  static PackedWeights from(const BitMatrix& m) { return {m.rows(), m.cols(), repack32(m)}; }
};

struct ExportedLinear {  // fc or deconv
  bool binarized = false;
  PackedWeights bits;         // binarized: fc [out, in], deconv [in_ch, out_ch * k * k]
  FloatTensor weight;         // real-valued layers only
  FloatTensor bias;           // empty when absent
};

struct ExportedBna {
  bool thresholded = false;   // integer threshold form
  bool binarized = false;     // sign activation (otherwise ReLU)
  std::vector<std::int32_t> thresholds;
  std::vector<std::uint32_t> dir_bits;  // bit c = 1: +1 iff a >= tau_b; 0: +1 iff a <= tau_b
  BatchNormLayer<float> real;           // used when !thresholded
};

// Run-time form of a trained generator.
struct ExportBundle {
  ScenarioConfig scenario;
  Architecture arch;
  ExportedLinear fc1;
  ExportedBna bna1;
  ExportedLinear fc2;
  ExportedBna bna1b;
  ExportedLinear deconv1;
  ExportedBna bna2;
  ExportedLinear deconv2;

  bool has_binary_content() const {
    return fc1.binarized || fc2.binarized || deconv1.binarized || deconv2.binarized || bna1.thresholded ||
           bna1b.thresholded || bna2.thresholded;
  }
};

// Which eval-path stage outputs are integer-valued for a given model.
struct IntegerStages {
  bool input = false, fc1 = false, bna1 = false, fc2 = false, bna1b = false, deconv1 = false, bna2 = false,
       deconv2 = false;
};

inline IntegerStages integer_stages(const Generator& m) {
  IntegerStages s;
  s.input = m.scenario.input_as_integer;
  s.fc1 = s.input && m.fc1.binarized && !m.fc1.has_bias();
  s.bna1 = s.fc1 && m.bna1.binarized;
  s.fc2 = s.bna1 && m.fc2.binarized && !m.fc2.has_bias();
  s.bna1b = s.fc2 && m.bna1b.binarized;
  s.deconv1 = s.bna1b && m.deconv1.binarized && !m.deconv1.has_bias();
  s.bna2 = s.deconv1 && m.bna2.binarized;
  s.deconv2 = s.bna2 && m.deconv2.binarized && !m.deconv2.has_bias();
  return s;
}

namespace detail {

inline ExportedLinear export_fc(const FcLayer<float>& l) {
  ExportedLinear e;
  e.binarized = l.binarized;
  if (l.binarized) {
    e.bits = PackedWeights::from(l.weight_bits());
  } else {
    e.weight = l.weight;
  }
  e.bias = l.bias;
  return e;
}

inline ExportedLinear export_deconv(const DeconvLayer<float>& l) {
  ExportedLinear e;
  e.binarized = l.binarized;
  if (l.binarized) {
    e.bits = PackedWeights::from(l.weight_bits());
  } else {
    e.weight = l.weight;
  }
  e.bias = l.bias;
  return e;
}

inline ExportedBna export_bna(const BatchNormLayer<float>& l, const std::string& name, bool integer_input) {
  ExportedBna e;
  e.binarized = l.binarized;
  e.thresholded = l.binarized && integer_input;
  if (!e.thresholded) {
    e.real = l;
    return e;
  }
  const BNParams p = bn_params(l, name);
  e.thresholds.reserve(p.thresholds.size());
  e.dir_bits.assign(words_for(p.thresholds.size(), 32), 0);
  for (std::size_t c = 0; c < p.thresholds.size(); ++c) {
    e.thresholds.push_back(p.thresholds[c].tau_b);
    if (p.thresholds[c].dir == ThresholdDir::kGreaterEqual) e.dir_bits[c / 32] |= std::uint32_t{1} << (c % 32);
  }
  return e;
}

}  // namespace detail

// Binarize and pack the weights of binarized layers, fold every batchnorm
// that sees integer activations into (threshold, direction), and pass the
// real-valued layers through as float32. Throws DegenerateNeuronError.
inline ExportBundle fold_and_binarize(const Generator& m) {
  const IntegerStages st = integer_stages(m);
  ExportBundle b;
  b.scenario = m.scenario;
  b.arch = m.arch;
  b.fc1 = detail::export_fc(m.fc1);
  b.bna1 = detail::export_bna(m.bna1, "bna1", st.fc1);
  b.fc2 = detail::export_fc(m.fc2);
  b.bna1b = detail::export_bna(m.bna1b, "bna1b", st.fc2);
  b.deconv1 = detail::export_deconv(m.deconv1);
  b.bna2 = detail::export_bna(m.bna2, "bna2", st.deconv1);
  b.deconv2 = detail::export_deconv(m.deconv2);
  return b;
}

// ---------------------------------------------------------------------------
// Reference run-time over the exported representation. The integer stages
// read the 32-bit words directly and share no code with the model path.
// ---------------------------------------------------------------------------
namespace runtime {

inline IntTensor fc_int(const IntTensor& x, const PackedWeights& w) {
  const std::size_t batch = x.dim(0), in = x.dim(1);
  if (in != w.cols) throw ShapeError("fc input width does not match exported weights");
  const std::size_t wpr = w.words_per_row();
  IntTensor y({batch, w.rows});
  const bool pm_one = std::all_of(x.data().begin(), x.data().end(), [](std::int32_t v) { return v == 1 || v == -1; });
  std::vector<std::uint32_t> xb(wpr);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::int32_t* xr = x.ptr() + b * in;
    if (pm_one) {
      std::fill(xb.begin(), xb.end(), 0u);
      for (std::size_t k = 0; k < in; ++k)
        if (xr[k] > 0) xb[k / 32] |= std::uint32_t{1} << (k % 32);
    }
    for (std::size_t j = 0; j < w.rows; ++j) {
      const std::uint32_t* wr = w.words.data() + j * wpr;
      std::int32_t acc = 0;
      if (pm_one) {
        int agree = 0;
        for (std::size_t q = 0; q < wpr; ++q) {
          const std::uint32_t valid = (q + 1) * 32 <= in ? 0xFFFFFFFFu : ((std::uint32_t{1} << (in % 32)) - 1);
          agree += std::popcount(~(xb[q] ^ wr[q]) & valid);
        }
        acc = 2 * agree - static_cast<std::int32_t>(in);
      } else {
        for (std::size_t k = 0; k < in; ++k) acc += ((wr[k / 32] >> (k % 32)) & 1u) ? xr[k] : -xr[k];
      }
      y[b * w.rows + j] = acc;
    }
  }
  return y;
}

inline IntTensor bna_threshold(const IntTensor& a, const ExportedBna& e) {
  const std::size_t batch = a.dim(0), channels = a.dim(1);
  if (channels != e.thresholds.size()) throw ShapeError("threshold count does not match channels");
  const std::size_t spatial = a.size() / (batch * channels);
  IntTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t c = (i / spatial) % channels;
    const bool ge = (e.dir_bits[c / 32] >> (c % 32)) & 1u;
    const std::int32_t t = e.thresholds[c];
    out[i] = (ge ? a[i] >= t : a[i] <= t) ? 1 : -1;
  }
  return out;
}

// Output-stationary transposed convolution: every output pixel gathers the
// input taps that land on it.
inline IntTensor deconv_int(const IntTensor& x, const PackedWeights& w, std::size_t out_ch,
                            const ConvGeometry& g) {
  const std::size_t batch = x.dim(0), in_ch = x.dim(1), h = x.dim(2), wd = x.dim(3), k = g.kernel;
  if (in_ch != w.rows || out_ch * k * k != w.cols) throw ShapeError("deconv input does not match exported weights");
  const std::size_t ho = g.deconv_out(h), wo = g.deconv_out(wd);
  const auto s = static_cast<std::ptrdiff_t>(g.stride), p = static_cast<std::ptrdiff_t>(g.pad);
  IntTensor y({batch, out_ch, ho, wo});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_ch; ++o)
      for (std::size_t oy = 0; oy < ho; ++oy)
        for (std::size_t ox = 0; ox < wo; ++ox) {
          std::int32_t acc = 0;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(oy) + p - static_cast<std::ptrdiff_t>(ky);
            if (ny < 0 || ny % s != 0 || ny / s >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(ox) + p - static_cast<std::ptrdiff_t>(kx);
              if (nx < 0 || nx % s != 0 || nx / s >= static_cast<std::ptrdiff_t>(wd)) continue;
              const std::size_t iy = static_cast<std::size_t>(ny / s), ix = static_cast<std::size_t>(nx / s);
              for (std::size_t c = 0; c < in_ch; ++c) {
                const std::int32_t v = x[((b * in_ch + c) * h + iy) * wd + ix];
                acc += w.bit(c, (o * k + ky) * k + kx) ? v : -v;
              }
            }
          }
          y[((b * out_ch + o) * ho + oy) * wo + ox] = acc;
        }
  return y;
}

inline FloatTensor unpack_signs(const PackedWeights& w, const Shape& shape) {
  FloatTensor t(shape);
  for (std::size_t r = 0; r < w.rows; ++r)
    for (std::size_t c = 0; c < w.cols; ++c) t[r * w.cols + c] = w.bit(r, c) ? 1.0f : -1.0f;
  return t;
}

inline FloatTensor add_bias(const IntTensor& acc, const FloatTensor& bias) {
  FloatTensor out = acc.cast<float>();
  const std::size_t channels = acc.dim(1), inner = acc.size() / (acc.dim(0) * channels);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias[(i / inner) % channels];
  return out;
}

inline Activation<float> fc(const ExportedLinear& e, std::size_t out, std::size_t in, const Activation<float>& x) {
  if (const auto* xi = std::get_if<IntTensor>(&x); xi && e.binarized) {
    IntTensor acc = fc_int(*xi, e.bits);
    if (e.bias.empty()) return acc;
    return add_bias(acc, e.bias);
  }
  FcLayer<float> l;
  l.weight = e.binarized ? unpack_signs(e.bits, {out, in}) : e.weight;
  l.bias = e.bias;
  return fc_forward(l, as_real(x));
}

inline Activation<float> bna(const ExportedBna& e, const Activation<float>& a) {
  if (e.thresholded) {
    const auto* ai = std::get_if<IntTensor>(&a);
    if (!ai) throw ValueError("thresholded batchnorm received real-valued activations");
    return bna_threshold(*ai, e);
  }
  return bna_forward(e.real, as_real(a), Mode::kEval);
}

inline Activation<float> deconv(const ExportedLinear& e, std::size_t in_ch, std::size_t out_ch,
                                const Activation<float>& x) {
  const ConvGeometry g;
  if (const auto* xi = std::get_if<IntTensor>(&x); xi && e.binarized) {
    IntTensor acc = deconv_int(*xi, e.bits, out_ch, g);
    if (e.bias.empty()) return acc;
    return add_bias(acc, e.bias);
  }
  const FloatTensor w = e.binarized ? unpack_signs(e.bits, {in_ch, out_ch, g.kernel, g.kernel}) : e.weight;
  return deconv2d(as_real(x), w, e.bias.empty() ? nullptr : &e.bias, g);
}

}  // namespace runtime

// Eval-mode generation computed purely from the bundle.
inline GeneratorTrace<float> bundle_trace(const ExportBundle& b, const FloatTensor& z, const FloatTensor& y) {
  const Architecture& a = b.arch;
  if (z.rank() != 2 || z.dim(1) != a.z_dim || y.rank() != 2 || y.dim(1) != a.num_classes || y.dim(0) != z.dim(0))
    throw ShapeError("bundle inputs must be z [batch, z_dim] and y [batch, classes]");
  const std::size_t batch = z.dim(0);
  GeneratorTrace<float> tr;
  Activation<float> x;
  if (b.scenario.input_as_integer) {
    x = concat_features(quantize_input(z, b.scenario.a), quantize_label(y, b.scenario.a));
  } else {
    x = concat_features(z, y);
  }
  tr.stages.push_back({"input", x});
  x = runtime::fc(b.fc1, a.fc_units, a.input_features(), x);
  tr.stages.push_back({"fc1", x});
  x = runtime::bna(b.bna1, x);
  tr.stages.push_back({"bna1", x});
  x = runtime::fc(b.fc2, a.proj_features(), a.fc_units, x);
  tr.stages.push_back({"fc2", x});
  x = runtime::bna(b.bna1b, x);
  tr.stages.push_back({"bna1b", x});
  std::visit([&](auto& t) { t.set_shape({batch, a.proj_channels, a.base_size, a.base_size}); }, x);
  x = runtime::deconv(b.deconv1, a.proj_channels, a.deconv_filters, x);
  tr.stages.push_back({"deconv1", x});
  x = runtime::bna(b.bna2, x);
  tr.stages.push_back({"bna2", x});
  x = runtime::deconv(b.deconv2, a.deconv_filters, 1, x);
  tr.stages.push_back({"deconv2", x});
  const FloatTensor pre = as_real(x);
  tr.images = FloatTensor(pre.shape());
  for (std::size_t i = 0; i < pre.size(); ++i) tr.images[i] = std::tanh(pre[i]);
  return tr;
}

struct VerifyReport {
  std::size_t probes = 0;
  std::size_t integer_stages = 0;           // per probe batch, model side
  std::vector<std::string> mismatched;      // integer stages that differed
  double max_image_diff = 0.0;

  bool integer_match() const { return mismatched.empty(); }
  bool ok(double image_tolerance = 1e-5) const { return integer_match() && max_image_diff <= image_tolerance; }

  std::string to_string() const {
    std::ostringstream os;
    os << "probes: " << probes << "\n";
    if (probes == 0) return os.str();
    os << "integer stages checked: " << integer_stages << "\n";
    if (integer_match()) {
      os << "integer stages: exact match\n";
    } else {
      os << "integer stages: MISMATCH in";
      for (const auto& s : mismatched) os << " " << s;
      os << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", max_image_diff);
    os << "max image difference: " << buf << "\n";
    return os.str();
  }
};

// Runs `n_probes` random (z, y) pairs through the model's eval path and the
// bundle run-time and compares them stage by stage.
inline VerifyReport verify_export(const ExportBundle& bundle, const Generator& model, std::size_t n_probes,
                                  std::uint64_t seed = 0) {
  VerifyReport rep;
  rep.probes = n_probes;
  Rng rng(seed);
  const Architecture& a = model.arch;
  constexpr std::size_t kChunk = 16;
  for (std::size_t done = 0; done < n_probes; done += kChunk) {
    const std::size_t n = std::min(kChunk, n_probes - done);
    const FloatTensor z = uniform<float>(rng, {n, a.z_dim}, -1.0, 1.0);
    std::vector<int> labels(n);
    for (int& l : labels) l = static_cast<int>(rng.below(a.num_classes));
    const FloatTensor y = one_hot<float>(labels, a.num_classes);
    const auto ref = generator_trace(model, z, y);
    const auto got = bundle_trace(bundle, z, y);
    std::size_t ints = 0;
    for (std::size_t i = 0; i < ref.stages.size(); ++i) {
      if (!ref.stages[i].is_integer()) continue;
      ++ints;
      const bool same = got.stages[i].is_integer() &&
                        std::get<IntTensor>(got.stages[i].value) == std::get<IntTensor>(ref.stages[i].value);
      if (!same && std::find(rep.mismatched.begin(), rep.mismatched.end(), ref.stages[i].name) == rep.mismatched.end())
        rep.mismatched.push_back(ref.stages[i].name);
    }
    rep.integer_stages = ints;
    for (std::size_t i = 0; i < ref.images.size(); ++i)
      rep.max_image_diff = std::max(rep.max_image_diff,
                                    std::abs(static_cast<double>(ref.images[i]) - static_cast<double>(got.images[i])));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Flat tensor list: the common source of the C header, the JSON manifest and
// the binary bundle.
// ---------------------------------------------------------------------------
enum class ExportDType : std::uint8_t { kBits32 = 1, kInt32 = 2, kFloat32 = 3 };

struct ExportTensor {
  std::string name;
  ExportDType dtype;
  Shape shape;                       // logical shape; bit matrices are [rows, cols]
  std::vector<std::uint32_t> words;  // raw 32-bit payload (float bits for kFloat32)
};

namespace detail {

inline std::vector<std::uint32_t> float_words(const FloatTensor& t) {
  std::vector<std::uint32_t> w(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) w[i] = std::bit_cast<std::uint32_t>(t[i]);
  return w;
}

inline void add_linear(std::vector<ExportTensor>& out, const std::string& name, const ExportedLinear& e) {
  if (e.binarized) {
    out.push_back({name + "_w_bits", ExportDType::kBits32, {e.bits.rows, e.bits.cols}, e.bits.words});
  } else {
    out.push_back({name + "_w", ExportDType::kFloat32, e.weight.shape(), float_words(e.weight)});
  }
  if (!e.bias.empty()) out.push_back({name + "_b", ExportDType::kFloat32, e.bias.shape(), float_words(e.bias)});
}

inline void add_bna(std::vector<ExportTensor>& out, const std::string& name, const ExportedBna& e) {
  if (e.thresholded) {
    std::vector<std::uint32_t> t(e.thresholds.size());
    std::transform(e.thresholds.begin(), e.thresholds.end(), t.begin(),
                   [](std::int32_t v) { return static_cast<std::uint32_t>(v); });
    out.push_back({name + "_thresh", ExportDType::kInt32, {e.thresholds.size()}, std::move(t)});
    out.push_back({name + "_dir", ExportDType::kBits32, {1, e.thresholds.size()}, e.dir_bits});
    return;
  }
  const auto& r = e.real;
  out.push_back({name + "_gamma", ExportDType::kFloat32, r.gamma.shape(), float_words(r.gamma)});
  out.push_back({name + "_beta", ExportDType::kFloat32, r.beta.shape(), float_words(r.beta)});
  out.push_back({name + "_mean", ExportDType::kFloat32, r.running_mean.shape(), float_words(r.running_mean)});
  out.push_back({name + "_var", ExportDType::kFloat32, r.running_var.shape(), float_words(r.running_var)});
  const FloatTensor eps({1}, static_cast<float>(r.eps));
  out.push_back({name + "_eps", ExportDType::kFloat32, {1}, float_words(eps)});
}

inline const char* dtype_name(ExportDType d) {
  switch (d) {
    case ExportDType::kBits32: return "bits32";
    case ExportDType::kInt32: return "int32";
    case ExportDType::kFloat32: return "float32";
  }
  return "?";
}

inline std::string scenario_line(const ScenarioConfig& s) {
  std::ostringstream os;
  os << s.name << " (input_as_integer=" << s.input_as_integer << ", A=" << s.a << ", bfc=" << s.bfc
     << ", bbna1=" << s.bbna1 << ", bdeconv1=" << s.bdeconv1 << ", bbna2=" << s.bbna2
     << ", bdeconv2=" << s.bdeconv2 << ")";
  return os.str();
}

inline std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

inline std::vector<ExportTensor> bundle_tensors(const ExportBundle& b) {
  std::vector<ExportTensor> out;
  detail::add_linear(out, "fc1", b.fc1);
  detail::add_bna(out, "bna1", b.bna1);
  detail::add_linear(out, "fc2", b.fc2);
  detail::add_bna(out, "bna1b", b.bna1b);
  detail::add_linear(out, "deconv1", b.deconv1);
  detail::add_bna(out, "bna2", b.bna2);
  detail::add_linear(out, "deconv2", b.deconv2);
  return out;
}

inline constexpr char kBundleMagic[4] = {'B', 'D', 'C', 'X'};
inline constexpr std::uint32_t kBundleVersion = 1;

// Binary bundle: "BDCX", u32 version, u64 payload size, u32 crc32, payload.
// Payload: scenario and architecture as in the model file, u32 tensor count,
// then per tensor: str name, u8 dtype, u8 rank, u32 dims[rank], u32 word
// count, u32 words[].
inline std::vector<std::uint8_t> serialize_bundle(const ExportBundle& b) {
  ByteWriter p;
  detail::write_scenario(p, b.scenario);
  detail::write_arch(p, b.arch);
  const auto tensors = bundle_tensors(b);
  p.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    p.str(t.name);
    p.u8(static_cast<std::uint8_t>(t.dtype));
    p.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t d : t.shape) p.u32(static_cast<std::uint32_t>(d));
    p.u32(static_cast<std::uint32_t>(t.words.size()));
    for (std::uint32_t w : t.words) p.u32(w);
  }
  const auto payload = p.take();
  ByteWriter out;
  out.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(kBundleMagic), 4));
  out.u32(kBundleVersion);
  out.u64(payload.size());
  out.u32(crc32_of(payload));
  out.raw(payload);
  return out.take();
}

struct BundleFile {
  ScenarioConfig scenario;
  Architecture arch;
  std::vector<ExportTensor> tensors;
};

inline BundleFile deserialize_bundle(std::span<const std::uint8_t> bytes) {
  ByteReader head(bytes);
  const auto magic = head.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kBundleMagic)) throw FormatError("not a bundle file (bad magic)");
  const std::uint32_t version = head.u32();
  if (version != kBundleVersion) throw VersionError("unsupported bundle version " + std::to_string(version));
  const std::uint64_t size = head.u64();
  const std::uint32_t crc = head.u32();
  if (head.remaining() != size) throw FormatError("bundle payload size mismatch");
  const auto payload = head.raw(static_cast<std::size_t>(size));
  if (crc32_of(payload) != crc) throw FormatError("bundle checksum mismatch");
  ByteReader r(payload);
  BundleFile f;
  f.scenario = detail::read_scenario(r);
  f.arch = detail::read_arch(r);
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    ExportTensor t;
    t.name = r.str();
    t.dtype = static_cast<ExportDType>(r.u8());
    t.shape.resize(r.u8());
    for (auto& d : t.shape) d = r.u32();
    t.words.resize(r.u32());
    for (auto& w : t.words) w = r.u32();
    f.tensors.push_back(std::move(t));
  }
  return f;
}

// Stable identifier of a bundle's content, recorded in the header.
inline std::uint32_t bundle_build_id(const ExportBundle& b) { return crc32_of(serialize_bundle(b)); }

// C header text. Deterministic: the only varying field is the build id, which
// is derived from the bundle content.
inline std::string emit_header(const ExportBundle& b) {
  const auto tensors = bundle_tensors(b);
  std::ostringstream os;
  char buf[96];
  std::snprintf(buf, sizeof buf, "0x%08x", bundle_build_id(b));
  os << "// Binarized DCGAN generator parameters.\n"
     << "// Generated by bdcgan export; do not edit.\n"
     << "//\n"
     << "// build id: " << buf << "\n"
     << "// scenario: " << detail::scenario_line(b.scenario) << "\n"
     << "// input scale A: " << b.scenario.a << "\n"
     << "//\n"
     << "// Bit arrays hold one weight per bit, 1 = +1 and 0 = -1, row-major,\n"
     << "// ceil(cols / 32) uint32 words per row, column c at bit (c % 32) of\n"
     << "// word (c / 32), pad bits zero. Deconvolution weights are packed as\n"
     << "// [in_ch, out_ch * 5 * 5]. *_dir bit c = 1 means +1 iff a >= thresh[c],\n"
     << "// 0 means +1 iff a <= thresh[c].\n"
     << "//\n"
     << "// tensors:\n";
  for (const auto& t : tensors) {
    os << "//   " << t.name << " " << detail::dtype_name(t.dtype) << " " << to_string(t.shape);
    if (t.dtype == ExportDType::kBits32) os << " (" << words_for(t.shape[1], 32) << " words/row)";
    os << "\n";
  }
  os << "\n#ifndef B_DCGAN_PARAMS_H\n#define B_DCGAN_PARAMS_H\n\n#include <stdint.h>\n\n";
  const Architecture& a = b.arch;
  auto def = [&](const std::string& name, long long v) { os << "#define B_DCGAN_" << name << " " << v << "\n"; };
  def("Z_DIM", static_cast<long long>(a.z_dim));
  def("NUM_CLASSES", static_cast<long long>(a.num_classes));
  def("FC_UNITS", static_cast<long long>(a.fc_units));
  def("PROJ_CHANNELS", static_cast<long long>(a.proj_channels));
  def("BASE_SIZE", static_cast<long long>(a.base_size));
  def("DECONV_FILTERS", static_cast<long long>(a.deconv_filters));
  def("IMAGE_SIZE", static_cast<long long>(a.image_size()));
  def("KERNEL", 5);
  def("STRIDE", 2);
  def("PAD", 2);
  def("INPUT_AS_INTEGER", b.scenario.input_as_integer ? 1 : 0);
  def("A_VALUE", b.scenario.a);
  for (const auto& t : tensors) {
    if (t.dtype != ExportDType::kBits32) continue;
    def(detail::upper(t.name) + "_ROWS", static_cast<long long>(t.shape[0]));
    def(detail::upper(t.name) + "_COLS", static_cast<long long>(t.shape[1]));
    def(detail::upper(t.name) + "_WORDS_PER_ROW", static_cast<long long>(words_for(t.shape[1], 32)));
  }
  os << "\n";
  for (const auto& t : tensors) {
    const char* ctype = t.dtype == ExportDType::kFloat32 ? "float" : t.dtype == ExportDType::kInt32 ? "int32_t" : "uint32_t";
    os << "static const " << ctype << " " << t.name << "[" << t.words.size() << "] = {";
    for (std::size_t i = 0; i < t.words.size(); ++i) {
      os << (i % 8 == 0 ? "\n    " : " ");
      switch (t.dtype) {
        case ExportDType::kBits32: std::snprintf(buf, sizeof buf, "0x%08x", t.words[i]); break;
        case ExportDType::kInt32: std::snprintf(buf, sizeof buf, "%d", static_cast<std::int32_t>(t.words[i])); break;
        case ExportDType::kFloat32:
          std::snprintf(buf, sizeof buf, "%.9ef", static_cast<double>(std::bit_cast<float>(t.words[i])));
          break;
      }
      os << buf << (i + 1 < t.words.size() ? "," : "");
    }
    os << "\n};\n\n";
  }
  os << "#endif  // B_DCGAN_PARAMS_H\n";
  return os.str();
}

// JSON manifest: scenario, architecture, and per-tensor dtype, shape and CRC-32.
inline nlohmann::json bundle_manifest(const ExportBundle& b) {
  nlohmann::json j;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", bundle_build_id(b));
  j["build_id"] = buf;
  const auto& s = b.scenario;
  j["scenario"] = {{"name", s.name},   {"input_as_integer", s.input_as_integer},
                   {"A", s.a},         {"bfc", s.bfc},
                   {"bbna1", s.bbna1}, {"bdeconv1", s.bdeconv1},
                   {"bbna2", s.bbna2}, {"bdeconv2", s.bdeconv2}};
  const auto& a = b.arch;
  j["architecture"] = {{"z_dim", a.z_dim},
                       {"num_classes", a.num_classes},
                       {"fc_units", a.fc_units},
                       {"proj_channels", a.proj_channels},
                       {"base_size", a.base_size},
                       {"deconv_filters", a.deconv_filters}};
  j["tensors"] = nlohmann::json::array();
  for (const auto& t : bundle_tensors(b)) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.words.data());
    std::snprintf(buf, sizeof buf, "%08x", crc32_of({p, t.words.size() * 4}));
    j["tensors"].push_back({{"name", t.name}, {"dtype", detail::dtype_name(t.dtype)}, {"shape", t.shape},
                            {"words", t.words.size()}, {"crc32", buf}});
  }
  return j;
}

}  // namespace bdcgan

#endif  // BDCGAN_EXPORT_HPP_
