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

#include "ctsr/tensor_term.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ctsr {

namespace {

constexpr std::string_view kLabelAlphabet = "ijklmnopqrstuvwxyzabcdefgh";

std::string slot_list(const std::vector<SuffixLabel>& slots, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t s = begin; s < end; ++s) {
    if (s != begin) out += ',';
    out += slots[s].assigned() ? slots[s].name() : std::string("_");
  }
  return out;
}

std::string factor_text(const TensorFactor& f) {
  const auto& sh = f.shape;
  const auto order = static_cast<std::size_t>(sh.base_order);
  std::string quantity = sh.base;
  if (order > 0) quantity += "[" + slot_list(f.slots, 0, order) + "]";
  if (sh.deriv_order == 0) return quantity;
  std::string out = sh.deriv_order == 1 ? "d" : "d" + std::to_string(sh.deriv_order);
  out += quantity + "/";
  for (std::size_t s = order; s < f.slots.size(); ++s) {
    out += "dx[" + slot_list(f.slots, s, s + 1) + "]";
  }
  return out;
}

int compare_factors(const TensorFactor& a, const TensorFactor& b) {
  if (auto c = a.shape.base.compare(b.shape.base); c != 0) return c < 0 ? -1 : 1;
  if (a.shape.deriv_order != b.shape.deriv_order) return a.shape.deriv_order < b.shape.deriv_order ? -1 : 1;
  if (a.slots != b.slots) return a.slots < b.slots ? -1 : 1;
  return 0;
}

int compare_terms(const std::vector<TensorFactor>& a, const std::vector<TensorFactor>& b) {
  const auto n = std::min(a.size(), b.size());
  for (std::size_t f = 0; f < n; ++f) {
    if (int c = compare_factors(a[f], b[f]); c != 0) return c;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

// Renames labels in place: free labels to 0..f-1 by ascending original id,
// repeated labels to f, f+1, ... in order of first appearance.
void rename_labels(std::vector<TensorFactor>& factors, const std::vector<int>& counts) {
  std::vector<int> mapping(counts.size(), -1);
  int next = 0;
  for (std::size_t id = 0; id < counts.size(); ++id) {
    if (counts[id] == 1) mapping[id] = next++;
  }
  for (auto& f : factors) {
    for (auto& s : f.slots) {
      if (mapping[s.id] < 0) mapping[s.id] = next++;
      s.id = mapping[s.id];
    }
  }
}

// All orderings of each symmetric group, as a list of slot permutations of
// one factor.
std::vector<std::vector<int>> group_arrangements(const FactorShape& shape) {
  std::vector<std::vector<int>> result{std::vector<int>(static_cast<std::size_t>(shape.slot_count()))};
  std::iota(result[0].begin(), result[0].end(), 0);
  for (const auto& group : shape.symmetric_slot_groups()) {
    std::vector<std::vector<int>> next;
    std::vector<int> order = group;
    std::sort(order.begin(), order.end());
    do {
      for (auto perm : result) {
        for (std::size_t g = 0; g < group.size(); ++g) perm[group[g]] = order[g];
        next.push_back(std::move(perm));
      }
    } while (std::next_permutation(order.begin(), order.end()));
    result = std::move(next);
  }
  return result;
}

}  // namespace

std::string SuffixLabel::name() const {
  if (id < 0) return "_";
  if (static_cast<std::size_t>(id) < kLabelAlphabet.size()) return std::string(1, kLabelAlphabet[id]);
  return "s" + std::to_string(id);
}

std::vector<std::vector<int>> FactorShape::symmetric_slot_groups() const {
  std::vector<std::vector<int>> groups;
  if (symmetric_base && base_order == 2) groups.push_back({0, 1});
  if (deriv_order >= 2) {
    std::vector<int> g(static_cast<std::size_t>(deriv_order));
    std::iota(g.begin(), g.end(), base_order);
    groups.push_back(std::move(g));
  }
  return groups;
}

bool factor_less(const TensorFactor& a, const TensorFactor& b) { return compare_factors(a, b) < 0; }

int CandidateTerm::slot_count() const {
  int n = 0;
  for (const auto& f : factors) n += f.shape.slot_count();
  return n;
}

bool CandidateTerm::fully_labelled() const {
  for (const auto& f : factors) {
    if (static_cast<int>(f.slots.size()) != f.shape.slot_count()) return false;
    for (const auto& s : f.slots) {
      if (!s.assigned()) return false;
    }
  }
  return true;
}

std::vector<int> CandidateTerm::label_counts() const {
  std::vector<int> counts;
  for (const auto& f : factors) {
    for (const auto& s : f.slots) {
      if (!s.assigned()) continue;
      if (static_cast<std::size_t>(s.id) >= counts.size()) counts.resize(static_cast<std::size_t>(s.id) + 1, 0);
      ++counts[static_cast<std::size_t>(s.id)];
    }
  }
  return counts;
}

std::vector<SuffixLabel> CandidateTerm::free_suffixes() const {
  std::vector<SuffixLabel> out;
  const auto counts = label_counts();
  for (std::size_t id = 0; id < counts.size(); ++id) {
    if (counts[id] == 1) out.push_back({static_cast<int>(id)});
  }
  return out;
}

std::vector<SuffixLabel> CandidateTerm::repeated_suffixes() const {
  std::vector<SuffixLabel> out;
  const auto counts = label_counts();
  for (std::size_t id = 0; id < counts.size(); ++id) {
    if (counts[id] == 2) out.push_back({static_cast<int>(id)});
  }
  return out;
}

int TermTemplate::slot_count() const {
  int n = 0;
  for (const auto& f : factors) n += f.slot_count();
  return n;
}

std::vector<CandidateTerm> assign_suffixes(const TermTemplate& tmpl) {
  const int n = tmpl.slot_count();
  std::size_t total = 1;
  for (int s = 0; s < n; ++s) total *= static_cast<std::size_t>(n);

  std::vector<CandidateTerm> out;
  out.reserve(total);
  std::vector<int> digits(static_cast<std::size_t>(n), 0);
  for (std::size_t index = 0; index < total; ++index) {
    CandidateTerm term;
    term.factors.reserve(tmpl.factors.size());
    std::size_t pos = 0;
    for (const auto& shape : tmpl.factors) {
      TensorFactor f{shape, {}};
      f.slots.reserve(static_cast<std::size_t>(shape.slot_count()));
      for (int s = 0; s < shape.slot_count(); ++s) f.slots.push_back({digits[pos++]});
      term.factors.push_back(std::move(f));
    }
    out.push_back(std::move(term));
    // odometer increment, last slot fastest
    for (int d = n - 1; d >= 0; --d) {
      if (++digits[static_cast<std::size_t>(d)] < n) break;
      digits[static_cast<std::size_t>(d)] = 0;
    }
  }
  return out;
}

Validity check_validity(const CandidateTerm& term, int target_order) {
  if (!term.fully_labelled()) return {ValidityRule::kUnlabelled, "term has unlabelled slots"};
  const auto counts = term.label_counts();
  int free = 0;
  for (std::size_t id = 0; id < counts.size(); ++id) {
    if (counts[id] > 2) {
      return {ValidityRule::kSuffixRepeatedTooOften,
              "suffix " + SuffixLabel{static_cast<int>(id)}.name() + " appears " + std::to_string(counts[id]) + " times"};
    }
    if (counts[id] == 1) ++free;
  }
  if (free != target_order) {
    return {ValidityRule::kWrongFreeSuffixCount,
            std::to_string(free) + " free suffixes, target order is " + std::to_string(target_order)};
  }
  return {};
}

CandidateTerm canonicalize(const CandidateTerm& term) {
  if (!term.fully_labelled()) throw std::invalid_argument("canonicalize: term has unlabelled slots");
  const auto counts = term.label_counts();
  for (int c : counts) {
    if (c > 2) throw std::invalid_argument("canonicalize: invalid term " + to_text(term));
  }

  const auto nf = term.factors.size();
  std::vector<std::vector<std::vector<int>>> arrangements;
  arrangements.reserve(nf);
  for (const auto& f : term.factors) arrangements.push_back(group_arrangements(f.shape));

  std::vector<std::size_t> order(nf);
  std::iota(order.begin(), order.end(), 0);
  std::vector<TensorFactor> best;
  bool have_best = false;
  std::vector<TensorFactor> trial(nf);

  do {
    // mixed-radix walk over the symmetric arrangements of every factor
    std::vector<std::size_t> choice(nf, 0);
    while (true) {
      for (std::size_t p = 0; p < nf; ++p) {
        const auto& src = term.factors[order[p]];
        const auto& perm = arrangements[order[p]][choice[p]];
        trial[p].shape = src.shape;
        trial[p].slots.resize(src.slots.size());
        for (std::size_t s = 0; s < perm.size(); ++s) trial[p].slots[s] = src.slots[static_cast<std::size_t>(perm[s])];
      }
      rename_labels(trial, counts);
      if (!have_best || compare_terms(trial, best) < 0) {
        best = trial;
        have_best = true;
      }
      std::size_t p = 0;
      while (p < nf && ++choice[p] == arrangements[order[p]].size()) choice[p++] = 0;
      if (p == nf) break;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  return CandidateTerm{std::move(best)};
}

bool equivalent(const CandidateTerm& a, const CandidateTerm& b) { return canonicalize(a) == canonicalize(b); }

std::string to_text(const CandidateTerm& term) {
  if (term.factors.empty()) return "1";
  std::string out;
  for (const auto& f : term.factors) {
    if (!out.empty()) out += ' ';
    out += factor_text(f);
  }
  return out;
}

std::string to_text(const TermTemplate& tmpl) {
  CandidateTerm unlabelled;
  for (const auto& shape : tmpl.factors) {
    unlabelled.factors.push_back({shape, std::vector<SuffixLabel>(static_cast<std::size_t>(shape.slot_count()))});
  }
  return to_text(unlabelled);
}

}  // namespace ctsr

namespace ctsr {

namespace {

SuffixLabel parse_label(std::string_view s) {
  if (s.size() == 1) {
    const auto pos = kLabelAlphabet.find(s[0]);
    if (pos != std::string_view::npos) return {static_cast<int>(pos)};
  }
  if (s.size() > 1 && s[0] == 's') {
    int v = 0;
    for (char c : s.substr(1)) {
      if (c < '0' || c > '9') throw std::invalid_argument("bad suffix label '" + std::string(s) + "'");
      v = v * 10 + (c - '0');
    }
    return {v};
  }
  throw std::invalid_argument("bad suffix label '" + std::string(s) + "'");
}

// "name[a,b]" -> name, labels
std::pair<std::string, std::vector<SuffixLabel>> parse_indexed(std::string_view s) {
  const auto open = s.find('[');
  if (open == std::string_view::npos) return {std::string(s), {}};
  if (s.back() != ']') throw std::invalid_argument("malformed factor '" + std::string(s) + "'");
  std::vector<SuffixLabel> labels;
  auto inner = s.substr(open + 1, s.size() - open - 2);
  while (!inner.empty()) {
    const auto comma = inner.find(',');
    labels.push_back(parse_label(inner.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return {std::string(s.substr(0, open)), labels};
}

TensorFactor parse_factor(std::string_view tok, const std::vector<QuantityInfo>& quantities) {
  std::string_view quantity = tok;
  std::vector<SuffixLabel> deriv_labels;
  int deriv_order = 0;
  if (const auto slash = tok.find('/'); slash != std::string_view::npos) {
    if (tok[0] != 'd') throw std::invalid_argument("malformed derivative '" + std::string(tok) + "'");
    std::size_t pos = 1;
    int declared = 1;
    if (pos < slash && tok[pos] >= '2' && tok[pos] <= '9') declared = tok[pos++] - '0';
    quantity = tok.substr(pos, slash - pos);
    auto rest = tok.substr(slash + 1);
    while (!rest.empty()) {
      if (rest.substr(0, 3) != "dx[") throw std::invalid_argument("malformed derivative '" + std::string(tok) + "'");
      const auto close = rest.find(']');
      if (close == std::string_view::npos) throw std::invalid_argument("malformed derivative '" + std::string(tok) + "'");
      deriv_labels.push_back(parse_label(rest.substr(3, close - 3)));
      rest.remove_prefix(close + 1);
    }
    deriv_order = static_cast<int>(deriv_labels.size());
    if (deriv_order != declared) throw std::invalid_argument("derivative order mismatch in '" + std::string(tok) + "'");
  }
  auto [name, labels] = parse_indexed(quantity);
  const auto it = std::find_if(quantities.begin(), quantities.end(), [&](const QuantityInfo& q) { return q.name == name; });
  if (it == quantities.end()) throw std::invalid_argument("unknown quantity '" + name + "'");
  if (static_cast<int>(labels.size()) != it->order) throw std::invalid_argument("wrong index count in '" + std::string(tok) + "'");
  labels.insert(labels.end(), deriv_labels.begin(), deriv_labels.end());
  return {{it->name, it->order, deriv_order, it->symmetric}, std::move(labels)};
}

}  // namespace

CandidateTerm parse_term(std::string_view text, const std::vector<QuantityInfo>& quantities) {
  CandidateTerm term;
  while (!text.empty()) {
    const auto start = text.find_first_not_of(' ');
    if (start == std::string_view::npos) break;
    text.remove_prefix(start);
    const auto end = text.find(' ');
    const auto tok = text.substr(0, end);
    if (tok != "1") term.factors.push_back(parse_factor(tok, quantities));
    if (end == std::string_view::npos) break;
    text.remove_prefix(end);
  }
  return term;
}

}  // namespace ctsr
