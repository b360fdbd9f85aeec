/* Copyright 2026 The mcd-lstm Authors. All Rights Reserved.

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
#ifndef MCD_DATAKIT_HPP_
#define MCD_DATAKIT_HPP_

// File formats: UCR time-series archives and the binary weight file.
//
// Weight file layout. A text header of `key value` lines ending with a line
// `end`, followed by a little-endian payload of int16 raw values:
//
//   mcd-lstm-weights 1
//   task anomaly|classification
//   H <int>  NL <int>  B <Y/N string>  I <int>  O <int>  T <int>
//   weight_format <bits> <frac>   act_format ...   acc_format ...
//   dropout_p <real>  aleatoric_var <real>  scale_folded 0|1
//   payload_bytes <int>
//   checksum fnv1a64:<16 hex digits over the payload>
//   end
//
// Payload, per LSTM layer in order: W_x for gates i,f,g,o (each H x I,
// row-major), W_h for gates i,f,g,o (each H x H), b for gates i,f,g,o (each
// H). Then the dense weights (O x H_L, row-major) and dense bias (O).
// Layer shapes follow layer_plan(task, (H, NL, B), I).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mcd/arch.hpp"
#include "mcd/error.hpp"
#include "mcd/fxp.hpp"
#include "mcd/lstm.hpp"
#include "mcd/network.hpp"

namespace mcd {

struct Dataset {
  std::vector<std::vector<double>> samples;  // N x T
  std::vector<int> labels;                   // 0-based, contiguous
  std::vector<double> label_values;          // original label of class k
  std::string split = "test";
  bool normalized = false;

  std::size_t size() const { return samples.size(); }
  std::size_t length() const { return samples.empty() ? 0 : samples.front().size(); }
  std::size_t classes() const { return label_values.size(); }
};

// Zero mean, unit population variance (divide by T).
inline std::vector<double> z_normalize(const std::vector<double>& x) {
  detail::require(!x.empty(), "cannot normalize an empty sample");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  detail::require(var > 0.0, "cannot normalize a constant sample");
  const double sd = std::sqrt(var);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean) / sd;
  return out;
}

// Rows are `label v1 ... vT`, separated by commas and/or whitespace.
// Labels are remapped to 0..K-1 in ascending order of their original value.
inline Dataset parse_ucr(std::istream& in, bool normalize = true) {
  Dataset d;
  std::vector<double> raw_labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(tok, &used);
        detail::require(used == tok.size() && std::isfinite(v), "");
      } catch (const std::exception&) {
        detail::fail("line " + std::to_string(lineno) + ": non-numeric field '" +
                     tok + "'");
      }
      row.push_back(v);
    }
    if (row.empty()) continue;
    detail::require(row.size() >= 2,
                    "line " + std::to_string(lineno) + ": row has no values");
    std::vector<double> values(row.begin() + 1, row.end());
    if (!d.samples.empty()) {
      detail::require(values.size() == d.samples.front().size(),
                      "line " + std::to_string(lineno) + ": ragged row with " +
                          std::to_string(values.size()) + " values, expected " +
                          std::to_string(d.samples.front().size()));
    }
    raw_labels.push_back(row.front());
    d.samples.push_back(std::move(values));
  }
  detail::require(!d.samples.empty(), "dataset has no rows");
  d.label_values = raw_labels;
  std::sort(d.label_values.begin(), d.label_values.end());
  d.label_values.erase(std::unique(d.label_values.begin(), d.label_values.end()),
                       d.label_values.end());
  for (double l : raw_labels) {
    const auto it = std::lower_bound(d.label_values.begin(), d.label_values.end(), l);
    d.labels.push_back(static_cast<int>(it - d.label_values.begin()));
  }
  if (normalize) {
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
      try {
        d.samples[i] = z_normalize(d.samples[i]);
      } catch (const ValidationError&) {
        detail::fail("sample " + std::to_string(i) + " is constant");
      }
    }
    d.normalized = true;
  }
  return d;
}

inline Dataset load_ucr(const std::string& path, bool normalize = true) {
  std::ifstream f(path);
  detail::require(f.good(), "cannot open dataset " + path);
  return parse_ucr(f, normalize);
}

// Anomaly split: the normal training rows, and the test set with the
// anomalous training rows appended after the test rows.
struct AnomalySplit {
  Dataset train_normal;
  Dataset test;
};

inline AnomalySplit split_for_anomaly(const Dataset& train, const Dataset& test,
                                      int normal_class = 0) {
  detail::require(train.length() == test.length(),
                  "train and test sequence lengths differ");
  AnomalySplit s;
  s.train_normal.split = "train";
  s.train_normal.normalized = train.normalized;
  s.train_normal.label_values = train.label_values;
  s.test = test;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.labels[i] == normal_class) {
      s.train_normal.samples.push_back(train.samples[i]);
      s.train_normal.labels.push_back(train.labels[i]);
    } else {
      s.test.samples.push_back(train.samples[i]);
      s.test.labels.push_back(train.labels[i]);
    }
  }
  return s;
}

inline constexpr int kWeightFileVersion = 1;
inline constexpr const char* kWeightMagic = "mcd-lstm-weights";

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace detail {

inline void put_i16(std::string& out, std::int16_t v) {
  const auto u = static_cast<std::uint16_t>(v);
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>((u >> 8) & 0xff));
}

inline void put_all(std::string& out, const std::vector<std::int16_t>& v) {
  for (auto x : v) put_i16(out, x);
}

class PayloadReader {
 public:
  explicit PayloadReader(const std::string& bytes) : bytes_(bytes) {}

  void read(std::vector<std::int16_t>& v) {
    for (auto& x : v) {
      require(pos_ + 2 <= bytes_.size(), "weight payload is truncated");
      const auto lo = static_cast<unsigned char>(bytes_[pos_]);
      const auto hi = static_cast<unsigned char>(bytes_[pos_ + 1]);
      x = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
      pos_ += 2;
    }
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

inline std::string format_real(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

}  // namespace detail

inline std::string encode_payload(const NetworkParams& p) {
  std::string out;
  for (const auto& l : p.layers) {
    for (int g = 0; g < kGates; ++g) detail::put_all(out, l.wx[g].raw);
    for (int g = 0; g < kGates; ++g) detail::put_all(out, l.wh[g].raw);
    for (int g = 0; g < kGates; ++g) detail::put_all(out, l.b[g].raw);
  }
  detail::put_all(out, p.dense.w.raw);
  detail::put_all(out, p.dense.b.raw);
  return out;
}

inline void save_weights(const NetworkParams& p, std::ostream& out) {
  p.validate();
  const std::string payload = encode_payload(p);
  const auto fmt = [](const QFormat& f) {
    return std::to_string(f.total_bits) + " " + std::to_string(f.frac_bits);
  };
  out << kWeightMagic << ' ' << kWeightFileVersion << '\n'
      << "task " << to_string(p.task) << '\n'
      << "H " << p.arch.hidden << '\n'
      << "NL " << p.arch.layers << '\n'
      << "B " << p.arch.bayes << '\n'
      << "I " << p.input_size << '\n'
      << "O " << p.output_size << '\n'
      << "T " << p.seq_len << '\n'
      << "weight_format " << fmt(p.datapath.weight) << '\n'
      << "act_format " << fmt(p.datapath.act) << '\n'
      << "acc_format " << fmt(p.datapath.acc) << '\n'
      << "dropout_p " << detail::format_real(p.dropout_p) << '\n'
      << "aleatoric_var " << detail::format_real(p.aleatoric_var) << '\n'
      << "scale_folded " << (p.scale_folded ? 1 : 0) << '\n'
      << "payload_bytes " << payload.size() << '\n'
      << "checksum fnv1a64:" << detail::hex64(fnv1a64(payload)) << '\n'
      << "end\n";
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

inline void save_weights(const NetworkParams& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  detail::require(f.good(), "cannot write weight file " + path);
  save_weights(p, f);
  detail::require(f.good(), "failed writing weight file " + path);
}

inline NetworkParams load_weights(std::istream& in) {
  std::string line;
  detail::require(static_cast<bool>(std::getline(in, line)), "empty weight file");
  {
    std::istringstream ss(line);
    std::string magic;
    int version = 0;
    ss >> magic >> version;
    detail::require(magic == kWeightMagic, "not a weight file (bad magic)");
    detail::require(version == kWeightFileVersion,
                    "unknown weight file version " + std::to_string(version));
  }
  std::map<std::string, std::string> h;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    const auto sp = line.find(' ');
    detail::require(sp != std::string::npos, "malformed header line '" + line + "'");
    h[line.substr(0, sp)] = line.substr(sp + 1);
  }
  detail::require(ended, "weight file header is not terminated");
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = h.find(key);
    detail::require(it != h.end(), "weight file header lacks '" + key + "'");
    return it->second;
  };
  const auto get_int = [&](const std::string& key) {
    return detail::parse_int(get(key), key);
  };
  const auto get_fmt = [&](const std::string& key) {
    std::istringstream ss(get(key));
    QFormat f;
    detail::require(static_cast<bool>(ss >> f.total_bits >> f.frac_bits),
                    "bad format in '" + key + "'");
    return f;
  };

  const std::string payload_header = get("payload_bytes");
  const std::string checksum = get("checksum");
  const std::string payload(std::istreambuf_iterator<char>(in), {});
  const auto expected_bytes = static_cast<std::size_t>(std::stoull(payload_header));
  detail::require(checksum == "fnv1a64:" + detail::hex64(fnv1a64(payload)) &&
                      payload.size() == expected_bytes,
                  "weight payload checksum mismatch (" +
                      std::to_string(payload.size()) + " of " +
                      std::to_string(expected_bytes) + " bytes present)");

  NetworkParams p;
  p.task = parse_task(get("task"));
  p.arch.hidden = get_int("H");
  p.arch.layers = get_int("NL");
  p.arch.bayes = get("B");
  p.input_size = get_int("I");
  p.output_size = get_int("O");
  p.seq_len = get_int("T");
  p.datapath.weight = get_fmt("weight_format");
  p.datapath.act = get_fmt("act_format");
  p.datapath.acc = get_fmt("acc_format");
  p.datapath.validate();
  p.dropout_p = detail::parse_number(get("dropout_p"), "dropout_p");
  p.aleatoric_var = detail::parse_number(get("aleatoric_var"), "aleatoric_var");
  p.scale_folded = get_int("scale_folded") != 0;

  const auto plan = layer_plan(p.task, p.arch, p.input_size);
  detail::PayloadReader reader(payload);
  for (std::size_t k = 0; k < plan.size(); ++k) {
    LstmLayerParams l(static_cast<std::size_t>(plan[k].input),
                      static_cast<std::size_t>(plan[k].hidden),
                      p.arch.is_bayesian(k), p.datapath.weight);
    for (int g = 0; g < kGates; ++g) reader.read(l.wx[g].raw);
    for (int g = 0; g < kGates; ++g) reader.read(l.wh[g].raw);
    for (int g = 0; g < kGates; ++g) reader.read(l.b[g].raw);
    p.layers.push_back(std::move(l));
  }
  const auto hl = static_cast<std::size_t>(plan.back().hidden);
  const auto o = static_cast<std::size_t>(p.output_size);
  detail::require(p.output_size >= 1, "O must be >= 1");
  p.dense.w = FxMatrix(o, hl, p.datapath.weight);
  p.dense.b = FxArray(o, p.datapath.weight);
  reader.read(p.dense.w.raw);
  reader.read(p.dense.b.raw);
  detail::require(reader.done(), "weight payload size does not match the header shapes");
  p.validate();
  return p;
}

inline NetworkParams load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  detail::require(f.good(), "cannot open weight file " + path);
  return load_weights(f);
}

}  // namespace mcd

#endif  // MCD_DATAKIT_HPP_
