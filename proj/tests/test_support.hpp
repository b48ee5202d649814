// Copyright 2026 The CTSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ctsr/component.hpp"
#include "ctsr/library.hpp"
#include "ctsr/tensor_term.hpp"
#include "ctsr/theta.hpp"

namespace ctsr::testing {

/// Random but fixed value per canonical channel. `symmetric` names order-2
/// quantities whose index pair commutes; derivative axes always commute.
class RandomChannels {
 public:
  RandomChannels(std::uint64_t salt, std::set<std::string> symmetric = {})
      : salt_(salt), symmetric_(std::move(symmetric)) {}

  double operator()(const ComponentId& id) const {
    const std::string key = id.canonical(symmetric_.count(id.quantity) > 0).key();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::mt19937_64 rng(std::hash<std::string>{}(key) ^ salt_);
    const double v = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    cache_.emplace(key, v);
    return v;
  }

 private:
  std::uint64_t salt_;
  std::set<std::string> symmetric_;
  mutable std::map<std::string, double> cache_;
};

/// Values of a term over every free-index tuple under several random channel
/// assignments. The term is a polynomial in the channel values, so two terms
/// share a fingerprint exactly when they are the same function of the fields.
inline std::vector<double> fingerprint(const CandidateTerm& term, int dim, std::set<std::string> symmetric = {}) {
  std::vector<double> out;
  const int order = static_cast<int>(term.free_suffixes().size());
  for (std::uint64_t salt : {0x1234ULL, 0xbeefULL, 0x5151ULL}) {
    RandomChannels channels(salt, symmetric);
    for (const auto& tuple : free_tuples(dim, order)) {
      out.push_back(evaluate_candidate(term, std::cref(channels), dim, tuple));
    }
  }
  return out;
}

/// Fingerprints compared at a relative tolerance; rounds to 1e-9 buckets.
inline std::vector<long long> fingerprint_key(const std::vector<double>& f) {
  std::vector<long long> key;
  key.reserve(f.size());
  for (double v : f) key.push_back(std::llround(v * 1e9));
  return key;
}

// Brute-force oracle: every product of up to P plain factors times at most one
// derivative factor, every labelling, validity by direct label counting, and
// classes by evaluation fingerprint. Shares no code with the builder beyond
// term evaluation.
inline std::set<std::vector<long long>> oracle_classes(const std::vector<InputTensorSpec>& inputs, int p, int target, int dim) {
  std::vector<FactorShape> plain;
  std::vector<FactorShape> derivs;
  for (const auto& in : inputs) {
    plain.push_back({in.name, in.base_order, 0, in.symmetric_base});
    for (int d = 1; d <= in.max_deriv; ++d) derivs.push_back({in.name, in.base_order, d, in.symmetric_base});
  }
  std::vector<std::vector<FactorShape>> products{{}};
  std::vector<std::vector<std::size_t>> frontier{{}};
  for (int k = 1; k <= p; ++k) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& combo : frontier) {
      for (std::size_t i = combo.empty() ? 0 : combo.back(); i < plain.size(); ++i) {
        auto c = combo;
        c.push_back(i);
        std::vector<FactorShape> prod;
        for (std::size_t j : c) prod.push_back(plain[j]);
        products.push_back(prod);
        next.push_back(std::move(c));
      }
    }
    frontier = std::move(next);
  }
  std::set<std::vector<long long>> classes;
  std::set<std::string> symmetric;
  for (const auto& in : inputs) {
    if (in.symmetric_base) symmetric.insert(in.name);
  }
  for (const auto& prod : products) {
    std::vector<std::vector<FactorShape>> variants{prod};
    for (const auto& d : derivs) {
      auto v = prod;
      v.push_back(d);
      variants.push_back(std::move(v));
    }
    for (const auto& factors : variants) {
      int n = 0;
      for (const auto& f : factors) n += f.slot_count();
      std::vector<int> labels(static_cast<std::size_t>(n), 0);
      while (true) {
        std::map<int, int> count;
        for (int l : labels) ++count[l];
        int free = 0;
        bool ok = true;
        for (const auto& [l, c] : count) {
          if (c == 1) ++free;
          if (c > 2) ok = false;
        }
        if (ok && free == target) {
          CandidateTerm term;
          std::size_t k = 0;
          for (const auto& f : factors) {
            TensorFactor tf{f, {}};
            for (int s = 0; s < f.slot_count(); ++s) tf.slots.push_back(SuffixLabel{labels[k++]});
            term.factors.push_back(tf);
          }
          classes.insert(fingerprint_key(fingerprint(term, dim, symmetric)));
        }
        std::size_t pos = 0;
        while (pos < labels.size() && ++labels[pos] == n) labels[pos++] = 0;
        if (pos == labels.size()) break;
      }
    }
  }
  return classes;
}

inline std::set<std::vector<long long>> library_classes(const TensorLibrary& lib, int dim, std::set<std::string> symmetric = {}) {
  std::set<std::vector<long long>> out;
  for (const auto& e : lib.entries) out.insert(fingerprint_key(fingerprint(e.term, dim, symmetric)));
  return out;
}

}  // namespace ctsr::testing
