#pragma once

#include "basinctl/basin.hpp"
#include "basinctl/control.hpp"
#include "basinctl/equilibria.hpp"
#include "basinctl/model.hpp"
#include "basinctl/models.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace basinctl {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// RFC-4180 field quoting (only when the field needs it).
std::string csv_escape(const std::string& field);

/// Full RFC-4180 parse (quotes, escaped quotes, newlines in fields).
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

// Census --------------------------------------------------------------------
void write_census_csv(std::ostream& out, const ParamModel& model, const EquilibriumCensus& census);
nlohmann::ordered_json census_to_json(const ParamModel& model, const EquilibriumCensus& census);

// Control traces ------------------------------------------------------------
void write_trace_csv(std::ostream& out, const ParamModel& model, const ControlTrace& trace);
nlohmann::ordered_json trace_to_json(const ParamModel& model, const ControlTrace& trace);

// Basin estimates (one or more labelled phases, e.g. before/after) ----------
using LabelledBasin = std::pair<std::string, BasinEstimate>;
void write_basin_csv(std::ostream& out, const ParamModel& model,
                     const std::vector<LabelledBasin>& estimates);
nlohmann::ordered_json basin_to_json(const ParamModel& model,
                                     const std::vector<LabelledBasin>& estimates);

// Boolean attractor report ---------------------------------------------------
void write_boolean_csv(std::ostream& out);
nlohmann::ordered_json boolean_to_json();

}  // namespace basinctl
