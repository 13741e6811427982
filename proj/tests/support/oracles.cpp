#include "oracles.hpp"

#include <algorithm>
#include <numeric>

#include "random_trees.hpp"

namespace treerules::testing {
namespace {

__extension__ using i128 = __int128;

struct Fraction {
  i128 num = 0;
  i128 den = 1;
};

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a == 0 ? 1 : a;
}

Fraction reduce(Fraction f) {
  if (f.den < 0) {
    f.num = -f.num;
    f.den = -f.den;
  }
  const i128 g = gcd128(f.num, f.den);
  return {f.num / g, f.den / g};
}

Fraction sub(Fraction a, Fraction b) { return reduce({a.num * b.den - b.num * a.den, a.den * b.den}); }
Fraction mul(Fraction a, Fraction b) { return reduce({a.num * b.num, a.den * b.den}); }
bool greater(Fraction a, Fraction b) { return a.num * b.den > b.num * a.den; }

Fraction gini_fraction(i128 a, i128 b) { return reduce({2 * a * b, (a + b) * (a + b)}); }

}  // namespace

std::optional<OracleSplit> brute_force_split(const Dataset& data, std::span<const std::uint32_t> rows) {
  i128 a = 0;
  i128 b = 0;
  for (auto r : rows) (data.target(r) == 0 ? a : b) += 1;
  const i128 n = a + b;
  const Fraction parent = gini_fraction(a, b);

  std::optional<OracleSplit> best;
  Fraction best_decrease{0, 1};
  for (std::size_t f = 0; f < data.n_features(); ++f) {
    std::vector<double> distinct;
    for (auto r : rows) distinct.push_back(data.value(r, f));
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
      double t = (distinct[k] + distinct[k + 1]) / 2.0;
      if (!(t < distinct[k + 1])) t = distinct[k];
      i128 la = 0, lb = 0, ra = 0, rb = 0;
      for (auto r : rows) {
        const bool left = data.value(r, f) <= t;
        const bool zero = data.target(r) == 0;
        (left ? (zero ? la : lb) : (zero ? ra : rb)) += 1;
      }
      const Fraction wl = mul({la + lb, n}, gini_fraction(la, lb));
      const Fraction wr = mul({ra + rb, n}, gini_fraction(ra, rb));
      const Fraction decrease = sub(sub(parent, wl), wr);
      if (greater(decrease, best_decrease)) {
        best_decrease = decrease;
        best = OracleSplit{static_cast<int>(f), t};
      }
    }
  }
  return best;
}

double mann_whitney_auc(std::span<const double> scores, std::span<const std::uint8_t> targets) {
  std::uint64_t twice = 0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (targets[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (targets[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) twice += 2;
      else if (scores[i] == scores[j]) twice += 1;
    }
  }
  return static_cast<double>(twice) / static_cast<double>(2 * pairs);
}

double traversal_probability(const Model& model, std::span<const double> sample) {
  const auto trees = estimators(model);
  double sum = 0.0;
  for (const TreeModel* tree : trees) {
    const auto& leaf = tree->node(traverse(*tree, sample));
    const auto total = leaf.class_counts[0] + leaf.class_counts[1];
    sum += static_cast<double>(leaf.class_counts[1]) / static_cast<double>(total);
  }
  return sum / static_cast<double>(trees.size());
}

}  // namespace treerules::testing
