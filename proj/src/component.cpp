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

#include "ctsr/component.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace ctsr {

char axis_letter(int axis) {
  static constexpr char kAxes[] = {'x', 'y', 'z'};
  if (axis < 0 || axis > 2) throw std::out_of_range("axis out of range: " + std::to_string(axis));
  return kAxes[axis];
}

bool valid_quantity_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

ComponentId ComponentId::canonical(bool symmetric_quantity) const {
  ComponentId out = *this;
  std::sort(out.axes.begin(), out.axes.end());
  if (symmetric_quantity) std::sort(out.index.begin(), out.index.end());
  return out;
}

std::string ComponentId::key() const {
  std::string out = quantity;
  for (int i : index) out += "[" + std::to_string(i) + "]";
  if (!axes.empty()) {
    out += '_';
    for (int a : axes) out += axis_letter(a);
  }
  if (time_derivative) out += "_t";
  return out;
}

ComponentId ComponentId::parse(std::string_view key) {
  ComponentId id;
  std::size_t pos = 0;
  while (pos < key.size() && key[pos] != '[' && key[pos] != '_') ++pos;
  id.quantity = std::string(key.substr(0, pos));
  if (!valid_quantity_name(id.quantity)) throw std::invalid_argument("bad component key: " + std::string(key));
  while (pos < key.size() && key[pos] == '[') {
    const auto close = key.find(']', pos);
    if (close == std::string_view::npos || close == pos + 1) {
      throw std::invalid_argument("bad component key: " + std::string(key));
    }
    int value = 0;
    for (std::size_t c = pos + 1; c < close; ++c) {
      if (!std::isdigit(static_cast<unsigned char>(key[c]))) throw std::invalid_argument("bad component key: " + std::string(key));
      value = value * 10 + (key[c] - '0');
    }
    id.index.push_back(value);
    pos = close + 1;
  }
  while (pos < key.size()) {
    if (key[pos] != '_' || pos + 1 >= key.size()) throw std::invalid_argument("bad component key: " + std::string(key));
    ++pos;
    if (key[pos] == 't' && pos + 1 == key.size()) {
      id.time_derivative = true;
      ++pos;
      break;
    }
    while (pos < key.size() && key[pos] != '_') {
      switch (key[pos]) {
        case 'x': id.axes.push_back(0); break;
        case 'y': id.axes.push_back(1); break;
        case 'z': id.axes.push_back(2); break;
        default: throw std::invalid_argument("bad component key: " + std::string(key));
      }
      ++pos;
    }
  }
  return id;
}

}  // namespace ctsr
