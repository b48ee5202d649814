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

#include "ctsr/library.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ctsr/csv.hpp"

namespace ctsr {

namespace {

// Multisets of size `k` drawn from `n` items, as non-decreasing index lists.
void multisets(int n, int k, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(current);
    return;
  }
  const int start = current.empty() ? 0 : current.back();
  for (int i = start; i < n; ++i) {
    current.push_back(i);
    multisets(n, k, current, out);
    current.pop_back();
  }
}

std::vector<std::vector<int>> multisets_up_to(int n, int max_k) {
  std::vector<std::vector<int>> out;
  for (int k = 0; k <= max_k; ++k) {
    if (n == 0 && k > 0) break;
    std::vector<int> current;
    multisets(n, k, current, out);
  }
  return out;
}

// Every index tuple of a quantity, with symmetric pairs restricted to i <= j.
std::vector<std::vector<int>> unique_indices(const InputTensorSpec& in, int dim) {
  std::vector<std::vector<int>> out{{}};
  for (int slot = 0; slot < in.base_order; ++slot) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out) {
      for (int a = 0; a < dim; ++a) {
        if (in.symmetric_base && in.base_order == 2 && slot == 1 && a < prefix[0]) continue;
        auto idx = prefix;
        idx.push_back(a);
        next.push_back(std::move(idx));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<std::vector<int>> ordered_axes(int depth, int dim) {
  std::vector<std::vector<int>> out{{}};
  for (int d = 0; d < depth; ++d) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out) {
      for (int a = 0; a < dim; ++a) {
        auto axes = prefix;
        axes.push_back(a);
        next.push_back(std::move(axes));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::string component_display(const ComponentId& c) {
  std::string q = c.quantity;
  if (!c.index.empty()) {
    q += '[';
    for (std::size_t s = 0; s < c.index.size(); ++s) {
      if (s) q += ',';
      q += axis_letter(c.index[s]);
    }
    q += ']';
  }
  if (c.axes.empty()) return q;
  std::string out = c.axes.size() == 1 ? "d" : "d" + std::to_string(c.axes.size());
  out += q + "/";
  for (int a : c.axes) {
    out += 'd';
    out += axis_letter(a);
  }
  return out;
}

}  // namespace

void LibrarySpec::validate() const {
  if (max_product_order < 0) throw std::invalid_argument("library: P must be >= 0");
  if (target_order < 0) throw std::invalid_argument("library: target order must be >= 0");
  if (spatial_dim != 2 && spatial_dim != 3) throw std::invalid_argument("library: spatial dimension must be 2 or 3");
  for (const auto& in : inputs) {
    if (!valid_quantity_name(in.name)) throw std::invalid_argument("library: bad input name '" + in.name + "'");
    if (in.base_order < 0) throw std::invalid_argument("library: negative order for " + in.name);
    if (in.max_deriv < 0 || in.max_deriv > 2) throw std::invalid_argument("library: max_deriv must be 0, 1 or 2 for " + in.name);
    if (in.symmetric_base && in.base_order != 2) {
      throw std::invalid_argument("library: only order-2 inputs can be symmetric (" + in.name + ")");
    }
    if (in.constant && in.max_deriv != 0) throw std::invalid_argument("library: constant input " + in.name + " has derivatives");
  }
}

std::vector<TermTemplate> enumerate_templates(const LibrarySpec& spec) {
  spec.validate();
  std::vector<FactorShape> plain;
  for (const auto& in : spec.inputs) {
    if (in.include_as_nonderivative && !in.constant) plain.push_back(in.shape(0));
  }
  struct SlotChoice {
    std::optional<FactorShape> shape;
    std::vector<int> excluded_standalone;
    int depth = 0;
  };
  std::vector<SlotChoice> second{{std::nullopt, {}, 0}};
  for (const auto& in : spec.inputs) {
    if (in.constant) {
      second.push_back({in.shape(0), {}, 0});
      continue;
    }
    for (int d = 1; d <= in.max_deriv; ++d) second.push_back({in.shape(d), in.excluded_standalone_derivatives, d});
  }

  std::vector<TermTemplate> out;
  for (const auto& mono : multisets_up_to(static_cast<int>(plain.size()), spec.max_product_order)) {
    for (const auto& choice : second) {
      if (mono.empty() && choice.depth > 0 &&
          std::find(choice.excluded_standalone.begin(), choice.excluded_standalone.end(), choice.depth) !=
              choice.excluded_standalone.end()) {
        continue;
      }
      TermTemplate t;
      for (int i : mono) t.factors.push_back(plain[static_cast<std::size_t>(i)]);
      if (choice.shape) t.factors.push_back(*choice.shape);
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::optional<std::size_t> TensorLibrary::find(const std::string& text) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), text,
                             [](const LibraryEntry& e, const std::string& t) { return e.text < t; });
  if (it == entries.end() || it->text != text) return std::nullopt;
  return static_cast<std::size_t>(it - entries.begin());
}

TensorLibrary build_tensor_library(const LibrarySpec& spec) {
  TensorLibrary lib;
  lib.templates = enumerate_templates(spec);
  std::map<std::string, LibraryEntry> unique;
  for (std::size_t t = 0; t < lib.templates.size(); ++t) {
    const auto& tmpl = lib.templates[t];
    const int n = tmpl.slot_count();
    // Free-suffix count has the parity of the slot count; skip hopeless templates.
    if (n < spec.target_order || (n - spec.target_order) % 2 != 0) continue;
    for (auto& raw : assign_suffixes(tmpl)) {
      ++lib.raw_assignments;
      if (!check_validity(raw, spec.target_order)) continue;
      auto canon = canonicalize(raw);
      auto text = to_text(canon);
      unique.try_emplace(text, LibraryEntry{std::move(canon), text, static_cast<int>(t)});
    }
  }
  lib.entries.reserve(unique.size());
  for (auto& [text, entry] : unique) lib.entries.push_back(std::move(entry));
  return lib;
}

std::string scalar_text(const std::vector<ComponentId>& monomial, const std::optional<ComponentId>& derivative) {
  std::string out;
  for (const auto& c : monomial) {
    if (!out.empty()) out += ' ';
    out += component_display(c);
  }
  if (derivative) {
    if (!out.empty()) out += ' ';
    out += component_display(*derivative);
  }
  return out.empty() ? "1" : out;
}

ScalarLibrary build_scalar_library(const LibrarySpec& spec) {
  spec.validate();
  const int dim = spec.spatial_dim;
  std::vector<ComponentId> plain;
  struct Deriv {
    ComponentId id;
    bool standalone_allowed;
  };
  std::vector<Deriv> derivs;
  for (const auto& in : spec.inputs) {
    if (in.constant) continue;
    const auto indices = unique_indices(in, dim);
    if (in.include_as_nonderivative) {
      for (const auto& idx : indices) plain.push_back({in.name, idx, {}, false});
    }
  }
  for (const auto& in : spec.inputs) {
    if (in.constant) continue;
    const auto indices = unique_indices(in, dim);
    for (const auto& idx : indices) {
      for (int d = 1; d <= in.max_deriv; ++d) {
        const bool excluded = std::find(in.excluded_standalone_derivatives.begin(),
                                        in.excluded_standalone_derivatives.end(), d) != in.excluded_standalone_derivatives.end();
        for (auto& axes : ordered_axes(d, dim)) derivs.push_back({{in.name, idx, std::move(axes), false}, !excluded});
      }
    }
  }

  ScalarLibrary lib;
  for (const auto& mono : multisets_up_to(static_cast<int>(plain.size()), spec.max_product_order)) {
    std::vector<ComponentId> factors;
    for (int i : mono) factors.push_back(plain[static_cast<std::size_t>(i)]);
    if (!factors.empty()) lib.entries.push_back({factors, std::nullopt, scalar_text(factors, std::nullopt)});
    for (const auto& d : derivs) {
      if (factors.empty() && !d.standalone_allowed) continue;
      lib.entries.push_back({factors, d.id, scalar_text(factors, d.id)});
    }
  }
  return lib;
}

void write_library_report(std::ostream& out, const TensorLibrary& library) {
  out << "candidates: " << library.size() << "\n";
  for (std::size_t c = 0; c < library.size(); ++c) out << c << "  " << library.entries[c].text << "\n";
}

void write_library_report(std::ostream& out, const ScalarLibrary& library) {
  out << "candidates: " << library.size() << "\n";
  for (std::size_t c = 0; c < library.size(); ++c) out << c << "  " << library.entries[c].text << "\n";
}

void write_library_csv(std::ostream& out, const TensorLibrary& library) {
  out << "index,term,template_id\n";
  for (std::size_t c = 0; c < library.size(); ++c) {
    out << c << ',' << csv_field(library.entries[c].text) << ',' << library.entries[c].template_id << "\n";
  }
}

void write_library_csv(std::ostream& out, const ScalarLibrary& library) {
  out << "index,term,template_id\n";
  for (std::size_t c = 0; c < library.size(); ++c) out << c << ',' << csv_field(library.entries[c].text) << ",-1\n";
}

}  // namespace ctsr
