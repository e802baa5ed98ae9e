#ifndef CUSPLAB_REPORT_HPP
#define CUSPLAB_REPORT_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "cusplab/intertwining.hpp"

namespace cusplab {

inline constexpr const char* kVersion = "0.1.0";

// One checked quantity: value, tolerance and verdict.
struct Criterion {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Deterministic report: command, canonical config echo with hash, results
// payload and the per-criterion verdicts. Wall-clock time is intentionally
// logged to stderr by the driver, never stored here, so byte-identical
// reruns stay byte-identical.
struct Report {
  std::string command;
  nlohmann::ordered_json config;
  nlohmann::ordered_json results;
  std::vector<Criterion> criteria;

  bool all_pass() const;
};

std::string fnv1a_hex(const std::string& data);

nlohmann::ordered_json to_json(const Report& rep);
std::string to_csv(const Report& rep);   // one row per criterion
std::string to_text(const Report& rep);

nlohmann::ordered_json form_value_to_json(const FormValue& v);
nlohmann::ordered_json to_json(const IntertwiningResult& r);
nlohmann::ordered_json to_json(const RestrictedClass& r);
nlohmann::ordered_json to_json(const RestrictionReport& r);
nlohmann::ordered_json to_json(const PoincareEstimate& e);
nlohmann::ordered_json to_json(const TruncatedSeries& s);
nlohmann::ordered_json to_json(const CohomologyReport& r);

}  // namespace cusplab

#endif
