#include "cusplab/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cusplab/parallel.hpp"

namespace cusplab {

namespace {

Matrix lorentz_inverse(const Matrix& g) {
  const int n = static_cast<int>(g.rows()) - 2;
  const Matrix J = lorentz_form(n);
  return J * g.transpose() * J;
}

void check_finite_order(const Matrix& g, int max_order) {
  const int m = static_cast<int>(g.rows());
  const Matrix I = Matrix::Identity(m, m);
  if ((g - I).cwiseAbs().maxCoeff() <= 1e-9) return;
  Matrix p = g;
  for (int k = 2; k <= max_order; ++k) {
    p = p * g;
    if ((p - I).cwiseAbs().maxCoeff() <= 1e-7)
      throw std::invalid_argument("group has an element of finite order " + std::to_string(k));
  }
}

}  // namespace

KleinianGroup make_group(int n, std::vector<Matrix> generators,
                         std::vector<std::string> labels, bool torsion_check) {
  if (generators.empty() || generators.size() > 8)
    throw std::invalid_argument("group: need between 1 and 8 generators");
  KleinianGroup G;
  G.n = n;
  G.torsion_check = torsion_check;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    Matrix g = normalize_group_element(generators[i]);
    if (g.rows() != n + 2)
      throw std::invalid_argument("group: generator size does not match rank");
    G.generators.push_back(std::move(g));
    G.labels.push_back(i < labels.size() ? labels[i] : "g" + std::to_string(i));
  }
  // Alphabet: generators then the inverses that are genuinely new.
  G.alphabet = G.generators;
  for (const Matrix& g : G.generators) {
    const Matrix gi = lorentz_inverse(g);
    bool known = false;
    for (const Matrix& a : G.alphabet)
      if ((a - gi).cwiseAbs().maxCoeff() < 1e-9) {
        known = true;
        break;
      }
    if (!known) G.alphabet.push_back(gi);
  }
  if (torsion_check) {
    WordEnumerator words(G, 1e-7, 500000);
    words.extend_to(6);
    for (const Matrix& g : words.elements()) check_finite_order(g, 12);
  }
  return G;
}

KleinianGroup load_group(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open group file: " + path);
  nlohmann::json j;
  in >> j;
  const int n = j.at("n").get<int>();
  const int m = n + 2;
  std::vector<Matrix> gens;
  for (const auto& rows : j.at("generators")) {
    std::vector<double> flat = rows.get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != m * m)
      throw std::invalid_argument("group file: generator has wrong size");
    Matrix g(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) g(r, c) = flat[static_cast<std::size_t>(r * m + c)];
    gens.push_back(std::move(g));
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
  const bool torsion = j.value("torsion_check", true);
  return make_group(n, std::move(gens), std::move(labels), torsion);
}

std::string group_to_json(const KleinianGroup& G) {
  nlohmann::ordered_json j;
  j["n"] = G.n;
  j["generators"] = nlohmann::json::array();
  for (const Matrix& g : G.generators) {
    std::vector<double> flat;
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) flat.push_back(g(r, c));
    j["generators"].push_back(flat);
  }
  j["labels"] = G.labels;
  j["torsion_check"] = G.torsion_check;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// QuantizedSet
// ---------------------------------------------------------------------------

// The cell size is ten times the tolerance so that the whole ambiguity band
// (distances between 0.1 tol and 10 tol) is visible inside one cell; elements
// farther apart than the band can never share a cell, and equal elements
// (within 0.1 tol) land in the same or in a probed neighbor cell.
QuantizedSet::Key QuantizedSet::primary_key(const Matrix& M) const {
  const double cell = 10.0 * tol_;
  std::string key;
  key.reserve(static_cast<std::size_t>(M.size()) * sizeof(std::int64_t));
  for (int r = 0; r < M.rows(); ++r)
    for (int c = 0; c < M.cols(); ++c) {
      const std::int64_t q = std::llround(M(r, c) / cell);
      key.append(reinterpret_cast<const char*>(&q), sizeof(q));
    }
  return key;
}

std::vector<QuantizedSet::Key> QuantizedSet::probe_keys(const Matrix& M) const {
  // Entries close to a rounding boundary may quantize either way for two
  // floating representations of the same element; probe both sides.
  const double cell = 10.0 * tol_;
  std::vector<int> wobbly;
  std::vector<std::int64_t> base(static_cast<std::size_t>(M.size()));
  int pos = 0;
  for (int r = 0; r < M.rows(); ++r)
    for (int c = 0; c < M.cols(); ++c, ++pos) {
      const double q = M(r, c) / cell;
      const double rq = std::round(q);
      base[static_cast<std::size_t>(pos)] = static_cast<std::int64_t>(rq);
      if (std::abs(q - rq) > 0.5 - 1e-3) wobbly.push_back(pos);
    }
  if (wobbly.empty() || wobbly.size() > 8) return {};
  std::vector<Key> keys;
  const std::size_t combos = static_cast<std::size_t>(1) << wobbly.size();
  for (std::size_t mask = 1; mask < combos; ++mask) {
    std::vector<std::int64_t> alt = base;
    pos = 0;
    for (std::size_t b = 0; b < wobbly.size(); ++b)
      if (mask & (static_cast<std::size_t>(1) << b)) {
        const int p = wobbly[b];
        const int r = p / static_cast<int>(M.cols());
        const int c = p % static_cast<int>(M.cols());
        const double q = M(r, c) / cell;
        alt[static_cast<std::size_t>(p)] += (q > std::round(q)) ? 1 : -1;
      }
    std::string key;
    key.reserve(alt.size() * sizeof(std::int64_t));
    for (const std::int64_t v : alt)
      key.append(reinterpret_cast<const char*>(&v), sizeof(v));
    keys.push_back(std::move(key));
  }
  return keys;
}

std::size_t QuantizedSet::find_or_insert(const Matrix& M, std::size_t idx,
                                         const std::vector<Matrix>& store) {
  auto classify_hit = [&](std::size_t other) -> std::size_t {
    const double d = (store[other] - M).cwiseAbs().maxCoeff();
    if (d <= 0.1 * tol_) return other;
    if (d <= 10.0 * tol_)
      throw std::runtime_error(
          "element deduplication: near-collision inside the ambiguity band, tighten tolerance");
    throw std::runtime_error("element deduplication: key collision between distant elements");
  };
  const Key pk = primary_key(M);
  if (auto it = map_.find(pk); it != map_.end()) return classify_hit(it->second);
  for (const Key& k : probe_keys(M))
    if (auto it = map_.find(k); it != map_.end()) return classify_hit(it->second);
  map_.emplace(pk, idx);
  return idx;
}

// ---------------------------------------------------------------------------
// WordEnumerator
// ---------------------------------------------------------------------------

WordEnumerator::WordEnumerator(const KleinianGroup& G, double dedup_tol,
                               std::size_t max_elements)
    : G_(G), tol_(dedup_tol), max_elements_(max_elements), seen_(dedup_tol) {
  const int m = G.n + 2;
  elems_.push_back(Matrix::Identity(m, m));
  len_.push_back(0);
  seen_.find_or_insert(elems_[0], 0, elems_);
  frontier_.push_back(0);
}

void WordEnumerator::extend_to(int L) {
  while (L_ < L) {
    const int k = L_ + 1;
    // Deterministic candidate order: frontier index major, alphabet minor.
    const std::size_t n_cand = frontier_.size() * G_.alphabet.size();
    std::vector<Matrix> candidates = parallel_map<Matrix>(n_cand, [&](std::size_t i) {
      const std::size_t f = i / G_.alphabet.size();
      const std::size_t a = i % G_.alphabet.size();
      return Matrix(elems_[frontier_[f]] * G_.alphabet[a]);
    });
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < n_cand; ++i) {
      const std::size_t idx = elems_.size();
      if (seen_.find_or_insert(candidates[i], idx, elems_) == idx) {
        if (idx >= max_elements_)
          throw std::runtime_error("word enumeration exceeded the element budget");
        elems_.push_back(std::move(candidates[i]));
        len_.push_back(k);
        next.push_back(idx);
      }
    }
    frontier_ = std::move(next);
    L_ = k;
    if (frontier_.empty()) {
      L_ = L;  // group exhausted
      return;
    }
  }
}

std::vector<Matrix> enumerate_words(const KleinianGroup& G, int L, double dedup_tol,
                                    std::size_t max_elements) {
  WordEnumerator we(G, dedup_tol, max_elements);
  we.extend_to(L);
  return we.elements();
}

// ---------------------------------------------------------------------------
// Cusp detection
// ---------------------------------------------------------------------------

namespace {

// Greedy lattice basis from a redundant generating set of translation
// vectors: size-reduce each candidate against the basis, then re-reduce the
// whole basis until stable.
std::vector<Vector> lattice_basis(std::vector<Vector> vecs, double tol = 1e-6) {
  auto reduce_against = [&](Vector v, const std::vector<Vector>& basis,
                            int skip = -1) -> Vector {
    for (int pass = 0; pass < 16; ++pass) {
      Vector best = v;
      for (std::size_t j = 0; j < basis.size(); ++j) {
        if (static_cast<int>(j) == skip) continue;
        const Vector& b = basis[j];
        const double c = std::round(best.dot(b) / b.squaredNorm());
        if (c != 0.0) {
          const Vector cand = best - c * b;
          if (cand.norm() < best.norm() - tol) best = cand;
        }
      }
      if ((best - v).norm() <= tol) return best;
      v = best;
    }
    return v;
  };

  std::sort(vecs.begin(), vecs.end(),
            [](const Vector& a, const Vector& b) { return a.norm() < b.norm(); });
  std::vector<Vector> basis;
  for (const Vector& v0 : vecs) {
    if (v0.norm() < tol) continue;
    const Vector r = reduce_against(v0, basis);
    if (r.norm() <= tol) continue;
    basis.push_back(r);
    // Re-reduce the basis against itself until stable.
    for (int round = 0; round < 16; ++round) {
      std::sort(basis.begin(), basis.end(),
                [](const Vector& a, const Vector& b) { return a.norm() < b.norm(); });
      bool changed = false;
      for (std::size_t i = basis.size(); i-- > 0;) {
        const Vector ri = reduce_against(basis[i], basis, static_cast<int>(i));
        if ((ri - basis[i]).norm() > tol) {
          changed = true;
          if (ri.norm() <= tol)
            basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(i));
          else
            basis[i] = ri;
        }
      }
      if (!changed) break;
    }
  }
  std::sort(basis.begin(), basis.end(),
            [](const Vector& a, const Vector& b) { return a.norm() < b.norm(); });
  return basis;
}

}  // namespace

std::vector<CuspDatum> detect_cusps(const KleinianGroup& G, int L) {
  const auto words = enumerate_words(G, L);

  // Collect parabolic fixed points, clustered by position.
  std::vector<BoundaryPoint> points;
  std::vector<std::vector<std::size_t>> members;  // parabolic word indices per point
  for (std::size_t i = 0; i < words.size(); ++i) {
    const IsometryClass cls = classify_isometry(words[i]);
    if (cls.type != IsometryType::Parabolic) continue;
    const BoundaryPoint& xi = cls.fixed_points.at(0);
    bool matched = false;
    for (std::size_t p = 0; p < points.size(); ++p)
      if (boundary_distance(points[p], xi) < 1e-6) {
        members[p].push_back(i);
        matched = true;
        break;
      }
    if (!matched) {
      points.push_back(xi);
      members.push_back({i});
    }
  }

  // Merge fixed points in the same orbit of the enumerated words.
  std::vector<int> cls(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) cls[p] = static_cast<int>(p);
  for (std::size_t p = 0; p < points.size(); ++p)
    for (std::size_t q = 0; q < p; ++q) {
      if (cls[p] == cls[q]) continue;
      bool conj = false;
      for (const Matrix& g : words) {
        const BoundaryPoint img = boundary_point(g * points[q].xi, 1e-6);
        if (boundary_distance(img, points[p]) < 1e-6) {
          conj = true;
          break;
        }
      }
      if (conj) {
        const int from = cls[p], to = cls[q];
        for (auto& c : cls)
          if (c == from) c = to;
      }
    }

  std::vector<CuspDatum> cusps;
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (cls[p] != static_cast<int>(p)) continue;  // not the class representative
    CuspDatum cusp;
    cusp.xi = points[p];
    cusp.frame = frame_at(points[p], G.n);

    std::vector<Vector> translations;
    bool toric = true;
    const Matrix I = Matrix::Identity(G.n + 2, G.n + 2);
    for (std::size_t q = 0; q < points.size(); ++q) {
      if (cls[q] != static_cast<int>(p)) continue;
      if (boundary_distance(points[q], points[p]) > 1e-6) continue;  // conjugate lift elsewhere
      for (const std::size_t wi : members[q]) {
        const Matrix& g = words[wi];
        const IwasawaFactors F = iwasawa(g, cusp.frame);
        const bool pure = (F.k_part - I).cwiseAbs().maxCoeff() < 1e-8;
        if (!pure) toric = false;
        cusp.peripheral_generators.push_back(g);
        if (pure && std::abs(F.t - 1.0) < 1e-8) translations.push_back(F.translation);
      }
    }
    const auto basis = lattice_basis(translations);
    cusp.rank = static_cast<int>(basis.size());
    cusp.full_rank = (cusp.rank == G.n);
    cusp.is_toric = toric;
    if (cusp.rank > 0) {
      cusp.lattice = Matrix(G.n, cusp.rank);
      for (int j = 0; j < cusp.rank; ++j) cusp.lattice.col(j) = basis[static_cast<std::size_t>(j)];
      double diag = 0.0;
      for (const auto& b : basis) diag += b.norm();
      cusp.fundamental_diameter = 2.0 * std::asinh(0.5 * diag);
    }
    cusps.push_back(std::move(cusp));
  }
  return cusps;
}

// ---------------------------------------------------------------------------
// Coset enumeration
// ---------------------------------------------------------------------------

CosetEnumerator::CosetEnumerator(const KleinianGroup& G, const CuspDatum& cusp,
                                 double dedup_tol, std::size_t max_elements)
    : cusp_(cusp), words_(G, dedup_tol, max_elements) {
  if (!cusp.full_rank)
    throw std::invalid_argument("coset enumeration requires a full-rank cusp");
  if (!cusp.is_toric)
    throw std::invalid_argument("coset enumeration implemented for toric cusps");
  data_.dedup_tolerance = dedup_tol;
}

void CosetEnumerator::canonicalize_and_insert(const Matrix& g, int length) {
  const int n = cusp_.frame.n;
  const IwasawaFactors F = iwasawa(g, cusp_.frame);
  const Matrix& B = cusp_.lattice;
  const Vector cell_coords = B.fullPivLu().solve(F.translation);

  // Candidate roundings: components very close to a half-integer boundary
  // are tried both ways so that equal cosets never split.
  std::vector<std::vector<double>> roundings;
  roundings.emplace_back();
  for (int i = 0; i < n; ++i) {
    const double r = std::round(cell_coords(i));
    const bool wobbly = std::abs(std::abs(cell_coords(i) - r) - 0.5) < 1e-7;
    std::vector<std::vector<double>> next;
    for (auto& partial : roundings) {
      auto with = [&](double val) {
        auto copy = partial;
        copy.push_back(val);
        next.push_back(std::move(copy));
      };
      with(r);
      if (wobbly) with(cell_coords(i) > r ? r + 1.0 : r - 1.0);
    }
    roundings = std::move(next);
  }

  auto key_of = [&](const Matrix& rep) {
    const IwasawaFactors RF = iwasawa(rep, cusp_.frame);
    std::ostringstream os;
    const Vector cc = B.fullPivLu().solve(RF.translation);
    for (int i = 0; i < n; ++i) os << std::llround(cc(i) / 1e-7) << ",";
    os << std::llround(std::log(RF.t) / 1e-7) << ";";
    const Matrix& k = RF.k_part;
    for (int r = 0; r < k.rows(); ++r)
      for (int c = 0; c < k.cols(); ++c) os << std::llround(k(r, c) / 1e-7) << ",";
    return os.str();
  };

  // Primary canonical representative: nearest-lattice rounding.
  std::vector<Matrix> reps;
  std::vector<std::string> keys;
  for (const auto& rounding : roundings) {
    Vector lam(n);
    for (int i = 0; i < n; ++i) lam(i) = rounding[static_cast<std::size_t>(i)];
    const Matrix shift = cusp_.frame.exp_translation(-(B * lam));
    const Matrix rep = shift * g;
    reps.push_back(rep);
    keys.push_back(key_of(rep));
  }

  for (const std::string& k : keys)
    if (seen_.count(k)) return;  // coset already represented

  // Sanity: the canonical translation must lie in (a slightly padded) cell.
  {
    const IwasawaFactors RF = iwasawa(reps[0], cusp_.frame);
    const Vector cc = B.fullPivLu().solve(RF.translation);
    for (int i = 0; i < n; ++i)
      if (std::abs(cc(i)) > 0.5 + 1e-9)
        throw std::runtime_error("coset canonicalization left the fundamental cell");
  }

  const std::size_t idx = data_.reps.size();
  for (const std::string& k : keys) seen_.emplace(k, idx);
  data_.reps.push_back(reps[0]);
  data_.word_length.push_back(length);
  data_.t_values.push_back(F.t);
  data_.keys.push_back(keys[0]);
  if (F.t > 1.0) ++data_.inside_horoball_count;
}

void CosetEnumerator::extend_to(int L) {
  words_.extend_to(L);
  const auto& elems = words_.elements();
  const auto& len = words_.word_length();
  for (; consumed_ < elems.size(); ++consumed_)
    canonicalize_and_insert(elems[consumed_], len[consumed_]);
  data_.L = words_.enumerated_length();
}

CosetEnumeration enumerate_cosets(const KleinianGroup& G, const CuspDatum& cusp,
                                  int L) {
  CosetEnumerator ce(G, cusp);
  ce.extend_to(L);
  return ce.cosets();
}

// ---------------------------------------------------------------------------
// Orbital counting
// ---------------------------------------------------------------------------

PoincareEstimate poincare_series(const KleinianGroup& G, double s, int L,
                                 std::size_t max_elements) {
  WordEnumerator we(G, 1e-7, max_elements);
  we.extend_to(L);
  const auto& elems = we.elements();
  const auto& len = we.word_length();
  const Vector O = base_point(G.n);

  PoincareEstimate est;
  est.s = s;
  const int shells = we.enumerated_length();
  if (shells < 4) throw std::invalid_argument("poincare_series: need at least 4 shells");
  est.shell_masses.assign(static_cast<std::size_t>(shells) + 1, 0.0);
  // Words longer than this radius may still be missing from the enumerated
  // orbit; the counting slope is only trusted below the smallest distance
  // contributed by the last two shells.
  double complete_radius = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const double d = hyperbolic_distance(O, elems[i] * O);
    est.shell_masses[static_cast<std::size_t>(len[i])] += std::exp(-s * d);
    if (len[i] > 0) est.distances.push_back(d);
    if (len[i] >= shells - 1) complete_radius = std::min(complete_radius, d);
  }
  double acc = 0.0;
  for (double m : est.shell_masses) {
    acc += m;
    est.partial_sums.push_back(acc);
  }
  std::sort(est.distances.begin(), est.distances.end());

  // Growth exponent: slope of log N(R) against R over a window inside the
  // metrically complete part of the enumerated orbit.
  const double r_max = est.distances.empty() ? 0.0 : est.distances.back();
  if (!std::isfinite(complete_radius)) complete_radius = r_max;
  double hi = 0.98 * std::min(complete_radius, r_max);
  double lo = 0.45 * hi;
  std::vector<double> xs, ys;
  auto fill_window = [&]() {
    xs.clear();
    ys.clear();
    for (std::size_t i = 0; i < est.distances.size(); ++i) {
      const double R = est.distances[i];
      if (R < lo || R > hi) continue;
      xs.push_back(R);
      ys.push_back(std::log(static_cast<double>(i + 1)));
    }
  };
  fill_window();
  if (xs.size() < 8) {
    lo = 0.15 * hi;
    fill_window();
  }
  if (xs.size() < 6)
    throw std::invalid_argument("poincare_series: not enough orbit points in the fit window");
  auto slope_of = [](const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t a, std::size_t b) {
    double mx = 0, my = 0;
    for (std::size_t i = a; i < b; ++i) {
      mx += x[i];
      my += y[i];
    }
    const double cnt = static_cast<double>(b - a);
    mx /= cnt;
    my /= cnt;
    double num = 0, den = 0;
    for (std::size_t i = a; i < b; ++i) {
      num += (x[i] - mx) * (y[i] - my);
      den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
  };
  const double slope = slope_of(xs, ys, 0, xs.size());
  const double s1 = slope_of(xs, ys, 0, xs.size() / 2);
  const double s2 = slope_of(xs, ys, xs.size() / 2, xs.size());
  // Residual spread of the fit.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double ss_res = 0, ss_x = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = my + slope * (xs[i] - mx);
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_x += (xs[i] - mx) * (xs[i] - mx);
  }
  const double stderr_slope =
      std::sqrt(ss_res / (static_cast<double>(xs.size()) - 2.0) / ss_x);

  est.delta_hat = slope;
  est.band = std::max({0.5 * std::abs(s1 - s2), 2.0 * stderr_slope, 0.02});
  est.convergent = s > est.delta_hat + est.band;
  return est;
}

ConvergenceGate convergence_gate(const KleinianGroup& G, const CuspDatum& cusp,
                                 double s, int L_delta) {
  (void)cusp;  // gate depends on the group orbit, not the particular cusp
  if (L_delta <= 0) {
    // Adaptive depth: enumerate until the orbit sample is large enough for a
    // stable slope or the cap is reached.
    WordEnumerator we(G, 1e-7, 4000000);
    int L = 4;
    for (;;) {
      we.extend_to(L);
      if (we.elements().size() > 20000 || L >= 14) break;
      ++L;
    }
    L_delta = we.enumerated_length();
  }
  ConvergenceGate gate;
  gate.estimate = poincare_series(G, 0.5 * s, L_delta);
  gate.decision = (0.5 * s > gate.estimate.delta_hat + gate.estimate.band)
                      ? ConvergenceDecision::Converges
                      : ConvergenceDecision::Unknown;
  return gate;
}

}  // namespace cusplab
