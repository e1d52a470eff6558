#pragma once

// Defect-injection protocol: perturb one sub-model parameter of a reference
// building, diagnose the perturbed model against the reference's simulated
// measurements, and check the defect is localized.

#include "thermodiag/diagnose.hpp"
#include "thermodiag/ga.hpp"
#include "thermodiag/model.hpp"
#include "thermodiag/simulate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace thermodiag::verify {

enum class Expectation {
  Localize,  // best set holds the component's inside surface, J ratio < 0.2
  None,      // best set empty or J ratio > 0.9
  Control,   // no defect: empty best set, J(empty) < 1e-18
};

constexpr double kLocalizeRatio = 0.2;
constexpr double kNoneRatio = 0.9;
constexpr double kControlObjective = 1e-18;

/// Target paths:
///   <component>.layer<k>.<thickness|conductivity|density|specific_heat>  (k from 1, outside first)
///   <component>.<h_ci|h_ce|h_ri|h_re|absorptivity|area>
///   <h_ci|h_ce|h_ri|h_re>            every component
///   zone.<capacity|ventilation_rate>
struct DefectSpec {
  std::string id;
  std::string target;
  double base = 0.0;
  double perturbed = 0.0;
  Expectation expect = Expectation::Localize;
  std::string expected_component;  // Localize only

  bool is_control() const { return expect == Expectation::Control; }
};

struct CaseFile {
  std::vector<std::string> measured;  // node selectors
  std::vector<DefectSpec> cases;
};

CaseFile parse_cases_text(const std::string& text, const std::string& source = "<cases>");
CaseFile parse_cases(const std::string& path);

/// Copy of `desc` with the target parameter moved from base to perturbed.
/// Throws ModelError if the target is unknown or does not currently hold `base`.
BuildingDescription inject_defect(const BuildingDescription& desc, const DefectSpec& spec);

struct NoiseOptions {
  double sd = 0.0;  // degC, Gaussian
  std::uint64_t seed = 12345;
};

/// Simulates the reference without forcing and extracts the requested node
/// series plus the air node.
MeasurementSeries generate_pseudo_measurements(const BuildingDescription& reference, const WeatherSeries& weather,
                                               const std::vector<NodeId>& measured, const NoiseOptions& noise = {});

struct VerificationOutcome {
  std::string id;
  ForcingSet best;
  ForcingSet expected;
  double forced_objective = 0.0;    // J(best)
  double unforced_objective = 0.0;  // J(empty)
  double ratio = 0.0;
  bool pass = false;
  std::optional<double> oracle_objective;
  std::optional<ForcingSet> oracle_best;
  int generations = 0;
};

struct RunOptions {
  bool exhaustive = false;
  NoiseOptions noise;
  int skip_steps = 0;
};

VerificationOutcome run_case(const DefectSpec& spec, const BuildingDescription& reference,
                             const WeatherSeries& weather, const std::vector<std::string>& measured,
                             const ga::GAConfig& config, const RunOptions& options = {});

std::string format_outcomes_table(const std::vector<VerificationOutcome>& outcomes);
std::string format_outcomes_kv(const std::vector<VerificationOutcome>& outcomes);

}  // namespace thermodiag::verify
