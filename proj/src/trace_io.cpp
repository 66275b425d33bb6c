#include "basinctl/trace_io.hpp"

#include "basinctl/errors.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace basinctl {

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_escape(const std::string& field) {
  const bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"': in_quotes = true; row_started = true; break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r': break;
      case '\n':
        if (row_started || !field.empty()) {
          row.push_back(std::move(field));
          field.clear();
          rows.push_back(std::move(row));
          row.clear();
          row_started = false;
        }
        break;
      default: field += c; row_started = true; break;
    }
  }
  if (row_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::vector<std::string> state_names(const ParamModel& model) {
  if (!model.state_names.empty()) return model.state_names;
  std::vector<std::string> names;
  for (int i = 0; i < model.state_dim; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << "\n";
}

std::string events_field(const std::vector<ControlEvent>& events) {
  std::string s;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i) s += "; ";
    s += to_string(events[i].type) + ": " + events[i].detail;
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

void write_census_csv(std::ostream& out, const ParamModel& model,
                      const EquilibriumCensus& census) {
  const auto names = state_names(model);
  std::vector<std::string> header{"index", "classification"};
  for (const auto& n : names) header.push_back(n);
  for (int i = 0; i < model.state_dim; ++i) {
    header.push_back("eig" + std::to_string(i) + "_re");
    header.push_back("eig" + std::to_string(i) + "_im");
  }
  header.push_back("residual_norm");
  write_row(out, header);

  for (std::size_t idx = 0; idx < census.equilibria.size(); ++idx) {
    const Equilibrium& e = census.equilibria[idx];
    std::vector<std::string> row{std::to_string(idx), to_string(e.classification)};
    for (int i = 0; i < e.x.size(); ++i) row.push_back(format_double(e.x[i]));
    for (int i = 0; i < e.eigenvalues.size(); ++i) {
      row.push_back(format_double(e.eigenvalues[i].real()));
      row.push_back(format_double(e.eigenvalues[i].imag()));
    }
    row.push_back(format_double(e.residual_norm));
    write_row(out, row);
  }
}

nlohmann::ordered_json census_to_json(const ParamModel& model, const EquilibriumCensus& census) {
  nlohmann::ordered_json j;
  j["model"] = model.name;
  j["counts"] = {{"stable", census.n_stable},
                 {"saddle", census.n_saddle},
                 {"unstable", census.n_unstable},
                 {"non_hyperbolic", census.n_nonhyperbolic}};
  auto& list = j["equilibria"] = nlohmann::ordered_json::array();
  for (const auto& e : census.equilibria) {
    nlohmann::ordered_json je;
    je["classification"] = to_string(e.classification);
    je["x"] = std::vector<double>(e.x.begin(), e.x.end());
    auto& eig = je["eigenvalues"] = nlohmann::ordered_json::array();
    for (int i = 0; i < e.eigenvalues.size(); ++i) {
      eig.push_back({{"re", e.eigenvalues[i].real()}, {"im", e.eigenvalues[i].imag()}});
    }
    je["residual_norm"] = e.residual_norm;
    list.push_back(std::move(je));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Control traces
// ---------------------------------------------------------------------------

void write_trace_csv(std::ostream& out, const ParamModel& model, const ControlTrace& trace) {
  std::vector<std::string> header{"iteration"};
  for (const auto& n : model.param_names) header.push_back("pi_" + n);
  const std::size_t n_eigen = trace.initial_eigen_values.size();
  for (std::size_t i = 0; i < n_eigen; ++i) {
    header.push_back(trace.objective_labels[i] + "_re");
    header.push_back(trace.objective_labels[i] + "_im");
    header.push_back("overlap_" + std::to_string(trace.eigen_indices[i]));
  }
  for (std::size_t i = n_eigen; i < trace.objective_labels.size(); ++i)
    header.push_back(trace.objective_labels[i]);
  for (const auto& n : model.param_names) header.push_back("d_" + n);
  for (const auto& label : trace.objective_labels) header.push_back("w_" + label);
  header.push_back("events");
  write_row(out, header);

  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const auto& rec = trace.records[r];
    std::vector<std::string> row{std::to_string(rec.iteration)};
    for (int i = 0; i < rec.pi.size(); ++i) row.push_back(format_double(rec.pi[i]));
    for (std::size_t i = 0; i < n_eigen; ++i) {
      row.push_back(format_double(rec.eigen_values[i].real()));
      row.push_back(format_double(rec.eigen_values[i].imag()));
      row.push_back(format_double(rec.overlaps[i]));
    }
    for (double d : rec.distances) row.push_back(format_double(d));
    const bool has_dir = rec.direction.size() > 0;
    for (int i = 0; i < model.param_dim; ++i)
      row.push_back(has_dir ? format_double(rec.direction[i]) : std::string());
    for (std::size_t i = 0; i < trace.objective_labels.size(); ++i)
      row.push_back(i < rec.weights.size() ? format_double(rec.weights[i]) : std::string());
    std::string events = events_field(rec.events);
    if (r + 1 == trace.records.size()) {
      if (!events.empty()) events += "; ";
      events += "termination: " + to_string(trace.termination);
    }
    row.push_back(events);
    write_row(out, row);
  }
}

nlohmann::ordered_json trace_to_json(const ParamModel& model, const ControlTrace& trace) {
  nlohmann::ordered_json j;
  j["model"] = model.name;
  j["termination"] = to_string(trace.termination);
  j["iterations"] = trace.iterations;
  j["objectives"] = trace.objective_labels;
  j["eigen_indices"] = trace.eigen_indices;
  auto& recs = j["records"] = nlohmann::ordered_json::array();
  for (const auto& rec : trace.records) {
    nlohmann::ordered_json jr;
    jr["iteration"] = rec.iteration;
    nlohmann::ordered_json pi = nlohmann::ordered_json::object();
    for (int i = 0; i < rec.pi.size(); ++i) pi[model.param_names[i]] = rec.pi[i];
    jr["pi"] = std::move(pi);
    auto& eig = jr["eigenvalues"] = nlohmann::ordered_json::array();
    for (const auto& l : rec.eigen_values) eig.push_back({{"re", l.real()}, {"im", l.imag()}});
    jr["overlaps"] = rec.overlaps;
    jr["distances"] = rec.distances;
    if (rec.direction.size() > 0)
      jr["direction"] = std::vector<double>(rec.direction.begin(), rec.direction.end());
    jr["weights"] = rec.weights;
    if (!rec.events.empty()) {
      auto& ev = jr["events"] = nlohmann::ordered_json::array();
      for (const auto& e : rec.events) ev.push_back({{"type", to_string(e.type)}, {"detail", e.detail}});
    }
    recs.push_back(std::move(jr));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Basin estimates
// ---------------------------------------------------------------------------

void write_basin_csv(std::ostream& out, const ParamModel& model,
                     const std::vector<LabelledBasin>& estimates) {
  const auto names = state_names(model);
  std::vector<std::string> header{"phase", "kind", "attractor_index"};
  for (const auto& n : names) header.push_back(n);
  header.insert(header.end(), {"fraction", "ci99_half_width", "n_samples", "rng_seed"});
  write_row(out, header);

  for (const auto& [phase, est] : estimates) {
    for (std::size_t i = 0; i < est.attractors.size(); ++i) {
      std::vector<std::string> row{phase, "attractor", std::to_string(i)};
      for (int d = 0; d < est.attractors[i].size(); ++d)
        row.push_back(format_double(est.attractors[i][d]));
      row.push_back(format_double(est.fractions[i]));
      row.push_back(format_double(est.ci99_half_widths[i]));
      row.push_back(std::to_string(est.n_samples));
      row.push_back(std::to_string(est.rng_seed));
      write_row(out, row);
    }
    std::vector<std::string> row{phase, "unresolved", ""};
    for (int d = 0; d < model.state_dim; ++d) row.push_back("");
    row.push_back(format_double(est.unresolved_fraction));
    row.push_back("");
    row.push_back(std::to_string(est.n_samples));
    row.push_back(std::to_string(est.rng_seed));
    write_row(out, row);
  }
}

nlohmann::ordered_json basin_to_json(const ParamModel& model,
                                     const std::vector<LabelledBasin>& estimates) {
  nlohmann::ordered_json j;
  j["model"] = model.name;
  auto& phases = j["phases"] = nlohmann::ordered_json::array();
  for (const auto& [phase, est] : estimates) {
    nlohmann::ordered_json jp;
    jp["phase"] = phase;
    jp["n_samples"] = est.n_samples;
    jp["rng_seed"] = est.rng_seed;
    jp["box"] = {{"lower", std::vector<double>(est.box.lower.begin(), est.box.lower.end())},
                 {"upper", std::vector<double>(est.box.upper.begin(), est.box.upper.end())}};
    auto& attr = jp["attractors"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < est.attractors.size(); ++i) {
      attr.push_back(
          {{"x", std::vector<double>(est.attractors[i].begin(), est.attractors[i].end())},
           {"fraction", est.fractions[i]},
           {"ci99_half_width", est.ci99_half_widths[i]}});
    }
    jp["unresolved_fraction"] = est.unresolved_fraction;
    phases.push_back(std::move(jp));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Boolean report
// ---------------------------------------------------------------------------

namespace {

std::string cycle_string(const std::vector<BoolState>& cycle) {
  std::string s;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (i) s += " -> ";
    s += boolean_to_string(cycle[i]);
  }
  return s;
}

}  // namespace

void write_boolean_csv(std::ostream& out) {
  write_row(out, {"kind", "name", "states", "length", "basin_size", "is_fixed_point", "note"});
  for (const auto& a : boolean_attractors()) {
    write_row(out, {"attractor", "", cycle_string(a.cycle), std::to_string(a.cycle.size()),
                    std::to_string(a.basin_size), a.is_fixed_point() ? "true" : "false", ""});
  }
  for (const auto& c : boolean_reference_checks()) {
    std::string note;
    if (!c.is_fixed_point) {
      note = "discrepancy: printed rules map " + boolean_to_string(c.state) + " to " +
             boolean_to_string(c.image) + ", not a fixed point";
    }
    write_row(out, {"reference_check", c.name,
                    boolean_to_string(c.state) + " -> " + boolean_to_string(c.image), "1", "",
                    c.is_fixed_point ? "true" : "false", note});
  }
}

nlohmann::ordered_json boolean_to_json() {
  nlohmann::ordered_json j;
  auto& attr = j["attractors"] = nlohmann::ordered_json::array();
  for (const auto& a : boolean_attractors()) {
    nlohmann::ordered_json ja;
    ja["is_fixed_point"] = a.is_fixed_point();
    ja["basin_size"] = a.basin_size;
    auto& cyc = ja["cycle"] = nlohmann::ordered_json::array();
    for (BoolState s : a.cycle) cyc.push_back(boolean_to_string(s));
    attr.push_back(std::move(ja));
  }
  auto& checks = j["reference_checks"] = nlohmann::ordered_json::array();
  for (const auto& c : boolean_reference_checks()) {
    checks.push_back({{"name", c.name},
                      {"state", boolean_to_string(c.state)},
                      {"image", boolean_to_string(c.image)},
                      {"is_fixed_point", c.is_fixed_point}});
  }
  return j;
}

}  // namespace basinctl
