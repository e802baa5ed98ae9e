#ifndef CUSPLAB_ORBITS_HPP
#define CUSPLAB_ORBITS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cusplab/group.hpp"

namespace cusplab {

// ---------------------------------------------------------------------------
// Finitely generated groups of hyperbolic isometries, given by matrix
// generators.
// ---------------------------------------------------------------------------

struct KleinianGroup {
  int n = 0;
  std::vector<Matrix> generators;
  std::vector<std::string> labels;
  bool torsion_check = true;
  std::vector<Matrix> alphabet;  // generators and inverses, deduplicated
};

// Validates the generators (reprojecting once if slightly off the group) and,
// when torsion_check is set, scans words up to length 6 for elements of
// finite order <= 12, throwing if one is found.
KleinianGroup make_group(int n, std::vector<Matrix> generators,
                         std::vector<std::string> labels = {},
                         bool torsion_check = true);

// JSON interface: { "n": int, "generators": [[row-major]], "labels": [...] }.
KleinianGroup load_group(const std::string& path);
std::string group_to_json(const KleinianGroup& G);

// Built-in example groups; falls back to $CUSPLAB_PRESET_DIR/<name>.json.
//   z-parabolic    cyclic parabolic in H^2
//   hecke-2.5      <z -> z+2.5, z -> -1/z> in H^2
//   hecke-3        <z -> z+3,   z -> -1/z> in H^2
//   z2-parabolic   rank-2 translation lattice in H^3
//   two-cusps-h3   free product of the 4Z^2 lattice with its inversion
//                  conjugate: two non-conjugate full-rank cusps in H^3
KleinianGroup preset_group(const std::string& name);
std::vector<std::string> preset_names();

// ---------------------------------------------------------------------------
// Deduplicating set of matrices keyed by rounding entries to a grid.
// Raises on ambiguous near-collisions instead of guessing.
// ---------------------------------------------------------------------------

class QuantizedSet {
 public:
  explicit QuantizedSet(double tol = 1e-7) : tol_(tol) {}

  // Returns the index of the matching element, or inserts with index `idx`.
  // Throws on distance in the ambiguous band (0.1 tol, 10 tol].
  std::size_t find_or_insert(const Matrix& M, std::size_t idx,
                             const std::vector<Matrix>& store);
  double tolerance() const { return tol_; }

 private:
  using Key = std::string;
  Key primary_key(const Matrix& M) const;
  std::vector<Key> probe_keys(const Matrix& M) const;

  double tol_;
  std::unordered_map<Key, std::size_t> map_;
};

// ---------------------------------------------------------------------------
// Breadth-first word enumeration with exact-element deduplication. Elements
// are listed shell by shell in a deterministic order independent of the
// worker count.
// ---------------------------------------------------------------------------

class WordEnumerator {
 public:
  explicit WordEnumerator(const KleinianGroup& G, double dedup_tol = 1e-7,
                          std::size_t max_elements = 4000000);
  void extend_to(int L);

  int enumerated_length() const { return L_; }
  const std::vector<Matrix>& elements() const { return elems_; }
  const std::vector<int>& word_length() const { return len_; }

 private:
  KleinianGroup G_;
  double tol_;
  std::size_t max_elements_;
  QuantizedSet seen_;
  std::vector<Matrix> elems_;
  std::vector<int> len_;
  std::vector<std::size_t> frontier_;
  int L_ = 0;
};

// All distinct elements representable by words of length <= L.
std::vector<Matrix> enumerate_words(const KleinianGroup& G, int L,
                                    double dedup_tol = 1e-7,
                                    std::size_t max_elements = 4000000);

// ---------------------------------------------------------------------------
// Cusp data.
// ---------------------------------------------------------------------------

struct CuspDatum {
  BoundaryPoint xi;
  ParabolicFrame frame;
  std::vector<Matrix> peripheral_generators;
  int rank = 0;
  bool full_rank = false;
  bool is_toric = false;
  Matrix lattice;                // n x rank, columns in u-basis coordinates
  double fundamental_diameter = 0.0;
};

// Finds parabolic fixed points among words of length <= L, groups them into
// conjugacy classes (conjugacy searched over the same words), and assembles
// peripheral lattices. Cusps of rank < n are flagged not-full-rank.
std::vector<CuspDatum> detect_cusps(const KleinianGroup& G, int L);

// ---------------------------------------------------------------------------
// Coset enumeration relative to a cusp. Each representative is translated by
// the nearest peripheral lattice element so its horospherical part lies in
// the fundamental cell, then deduplicated by the (cell position, dilation,
// rotation) key.
// ---------------------------------------------------------------------------

struct CosetEnumeration {
  int L = 0;
  double dedup_tolerance = 1e-7;
  std::vector<Matrix> reps;
  std::vector<int> word_length;
  std::vector<double> t_values;
  std::vector<std::string> keys;
  long inside_horoball_count = 0;  // representatives with t > 1
};

class CosetEnumerator {
 public:
  CosetEnumerator(const KleinianGroup& G, const CuspDatum& cusp,
                  double dedup_tol = 1e-7, std::size_t max_elements = 4000000);
  void extend_to(int L);
  const CosetEnumeration& cosets() const { return data_; }

 private:
  void canonicalize_and_insert(const Matrix& g, int length);

  CuspDatum cusp_;
  WordEnumerator words_;
  std::size_t consumed_ = 0;
  std::unordered_map<std::string, std::size_t> seen_;
  CosetEnumeration data_;
};

CosetEnumeration enumerate_cosets(const KleinianGroup& G, const CuspDatum& cusp,
                                  int L);

// ---------------------------------------------------------------------------
// Orbital counting estimates.
// ---------------------------------------------------------------------------

struct PoincareEstimate {
  double s = 0.0;
  std::vector<double> shell_masses;  // per word-length shell, sum of e^{-s d}
  std::vector<double> partial_sums;  // cumulative
  std::vector<double> distances;     // sorted d(O, gamma O), gamma != 1
  double delta_hat = 0.0;            // growth exponent of the counting function
  double band = 0.0;                 // confidence band on delta_hat
  bool convergent = false;           // s > delta_hat + band
};

PoincareEstimate poincare_series(const KleinianGroup& G, double s, int L,
                                 std::size_t max_elements = 4000000);

enum class ConvergenceDecision { Converges, Unknown };

struct ConvergenceGate {
  ConvergenceDecision decision = ConvergenceDecision::Unknown;
  PoincareEstimate estimate;  // at exponent s/2
};

// The series gate: the sum over cosets at degree s converges when the
// orbital series at s/2 does. L_delta <= 0 picks the enumeration depth
// adaptively (orbit sample of ~20000 points, capped at length 14).
ConvergenceGate convergence_gate(const KleinianGroup& G, const CuspDatum& cusp,
                                 double s, int L_delta = 0);

}  // namespace cusplab

#endif
