#ifndef SYNTHTS_EVAL_SPLIT_HPP
#define SYNTHTS_EVAL_SPLIT_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "synthts/data/dataset.hpp"

namespace synthts::eval {

struct SplitSpec {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
  std::uint64_t seed = 1;
  // Experimental: assign whole subjects to partitions instead of windows.
  bool subject_disjoint = false;

  void validate() const;
};

// Index sets into the source dataset, each sorted ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Largest-remainder allocation of n samples to train/val/test. Equal
// remainders go to the smaller target first (val, test, train). When n >= 5
// no partition with a positive fraction is left empty.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitSpec& spec);

// Per-class allocation via split_counts after a seeded per-class shuffle.
// Every class present must have at least 5 samples.
Split stratified_split(std::span<const int> labels, const SplitSpec& spec);
Split stratified_split(const data::WindowedDataset& dataset, const SplitSpec& spec);

}  // namespace synthts::eval

#endif  // SYNTHTS_EVAL_SPLIT_HPP
