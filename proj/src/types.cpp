#include "types.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace catgp {

void MixedDataset::validate() const {
  const Eigen::Index n = rows();
  if (X.rows() != n || Z.rows() != n)
    throw std::invalid_argument("MixedDataset: X, Z, y must share the row count");
  if (static_cast<int>(level_counts.size()) != cat_dims())
    throw std::invalid_argument("MixedDataset: level_counts size must equal Z columns");
  for (int j = 0; j < cat_dims(); ++j) {
    if (level_counts[static_cast<std::size_t>(j)] < 2)
      throw std::invalid_argument("MixedDataset: every categorical variable needs >= 2 levels");
    for (Eigen::Index i = 0; i < n; ++i) {
      const int z = Z(i, j);
      if (z < 1 || z > level_counts[static_cast<std::size_t>(j)])
        throw std::invalid_argument("MixedDataset: level index out of range in column " +
                                    std::to_string(j + 1));
    }
  }
}

int GroupPartition::level_count() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.size());
  return n;
}

std::vector<int> GroupPartition::group_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) sizes.push_back(static_cast<int>(g.size()));
  return sizes;
}

std::vector<int> GroupPartition::membership(int C) const {
  validate(C);
  std::vector<int> member(static_cast<std::size_t>(C), -1);
  for (int l = 0; l < group_count(); ++l)
    for (int z : groups[static_cast<std::size_t>(l)]) member[static_cast<std::size_t>(z - 1)] = l;
  return member;
}

void GroupPartition::validate(int C) const {
  if (groups.empty()) throw std::invalid_argument("GroupPartition: no groups");
  std::vector<bool> seen(static_cast<std::size_t>(C), false);
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("GroupPartition: empty group");
    for (int z : g) {
      if (z < 1 || z > C) throw std::invalid_argument("GroupPartition: level out of range");
      if (seen[static_cast<std::size_t>(z - 1)])
        throw std::invalid_argument("GroupPartition: level appears twice");
      seen[static_cast<std::size_t>(z - 1)] = true;
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::invalid_argument("GroupPartition: groups must cover all levels");
}

GroupPartition GroupPartition::singletons(int C) {
  GroupPartition p;
  for (int z = 1; z <= C; ++z) p.groups.push_back({z});
  return p;
}

GroupPartition GroupPartition::single_group(int C) {
  GroupPartition p;
  p.groups.emplace_back();
  for (int z = 1; z <= C; ++z) p.groups.back().push_back(z);
  return p;
}

std::string GroupPartition::to_json() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t l = 0; l < groups.size(); ++l) {
    if (l) out << ',';
    out << '[';
    for (std::size_t i = 0; i < groups[l].size(); ++i) {
      if (i) out << ',';
      out << groups[l][i];
    }
    out << ']';
  }
  out << ']';
  return out.str();
}

GroupPartition GroupPartition::parse_json(const std::string& text) {
  GroupPartition p;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (i >= text.size() || text[i] != c)
      throw std::invalid_argument("partition: expected '" + std::string(1, c) + "'");
    ++i;
  };
  expect('[');
  skip_ws();
  while (i < text.size() && text[i] != ']') {
    expect('[');
    p.groups.emplace_back();
    skip_ws();
    while (i < text.size() && text[i] != ']') {
      std::size_t used = 0;
      const int z = std::stoi(text.substr(i), &used);
      i += used;
      p.groups.back().push_back(z);
      skip_ws();
      if (i < text.size() && text[i] == ',') {
        ++i;
        skip_ws();
      }
    }
    expect(']');
    skip_ws();
    if (i < text.size() && text[i] == ',') {
      ++i;
      skip_ws();
    }
  }
  expect(']');
  if (p.groups.empty()) throw std::invalid_argument("partition: no groups");
  return p;
}

bool GroupPartition::operator==(const GroupPartition& other) const {
  return groups == other.groups;
}

}  // namespace catgp
