#include <sstream>

#include <json.hpp>

#include "cbm/error.hpp"
#include "cbm/io.hpp"
#include "cbm/optimizer.hpp"

namespace cbm {

namespace {

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s.empty() || s == "unassigned") return Split::Unassigned;
  throw ConfigError("unknown split label '" + s + "'");
}

bool has_split(const Dataset& d) { return !d.split.empty(); }

}  // namespace

std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream os;
  os << "# fingerprint=" << fingerprint_hex(d.fingerprint) << " n_components=" << d.n_components << '\n';
  os << "scenario_id";
  for (std::size_t i = 0; i < d.n_components; ++i) os << ",u_" << i + 1;
  os << ",tau_star,cost_rate_star,split\n";
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const Scenario& row = d.rows[r];
    os << row.id;
    for (double v : row.u.u) os << ',' << format_number(v);
    os << ',' << format_number(row.tau_star) << ',' << format_number(row.cost_rate_star) << ','
       << to_string(has_split(d) ? d.split[r] : Split::Unassigned) << '\n';
  }
  return os.str();
}

Dataset dataset_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  Dataset d;
  if (!std::getline(is, line) || line.rfind("# fingerprint=", 0) != 0) {
    throw ConfigError("dataset CSV must start with a '# fingerprint=' line");
  }
  {
    std::istringstream meta(line.substr(2));
    std::string tok;
    while (meta >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string value = tok.substr(eq + 1);
      if (key == "fingerprint") d.fingerprint = parse_fingerprint_hex(value);
      if (key == "n_components") d.n_components = static_cast<std::size_t>(parse_double(value, "n_components"));
    }
  }
  if (!std::getline(is, line)) throw ConfigError("dataset CSV has no header row");
  const std::size_t n = d.n_components;
  if (split_csv_line(line).size() != n + 4) throw ConfigError("dataset CSV header does not match n_components");

  bool any_split = false;
  std::vector<Split> split;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != n + 4) throw ConfigError("dataset CSV row has " + std::to_string(cells.size()) + " cells");
    Scenario row;
    row.id = static_cast<std::size_t>(parse_double(cells[0], "scenario_id"));
    row.u = DegradationState::zeros(n);
    for (std::size_t i = 0; i < n; ++i) row.u[i] = parse_double(cells[1 + i], "u");
    row.tau_star = parse_double(cells[n + 1], "tau_star");
    row.cost_rate_star = parse_double(cells[n + 2], "cost_rate_star");
    const Split sp = parse_split(cells[n + 3]);
    any_split = any_split || sp != Split::Unassigned;
    split.push_back(sp);
    d.rows.push_back(std::move(row));
  }
  if (any_split) d.split = std::move(split);
  return d;
}

std::string dataset_to_json(const Dataset& d, int indent) {
  nlohmann::json j;
  j["format"] = "cbm-dataset";
  j["version"] = 1;
  j["fingerprint"] = fingerprint_hex(d.fingerprint);
  j["n_components"] = d.n_components;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const Scenario& row = d.rows[r];
    rows.push_back({{"scenario_id", row.id},
                    {"u", row.u.u},
                    {"tau_star", row.tau_star},
                    {"cost_rate_star", row.cost_rate_star},
                    {"at_boundary", row.at_boundary},
                    {"split", to_string(has_split(d) ? d.split[r] : Split::Unassigned)}});
  }
  j["rows"] = rows;
  return j.dump(indent);
}

Dataset dataset_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cbm-dataset") throw ConfigError("not a cbm-dataset document");
    Dataset d;
    d.fingerprint = parse_fingerprint_hex(j.at("fingerprint").get<std::string>());
    d.n_components = j.at("n_components").get<std::size_t>();
    bool any_split = false;
    std::vector<Split> split;
    for (const auto& r : j.at("rows")) {
      Scenario row;
      row.id = r.at("scenario_id").get<std::size_t>();
      row.u = DegradationState(r.at("u").get<std::vector<double>>());
      if (row.u.size() != d.n_components) throw ConfigError("dataset row has wrong u length");
      row.tau_star = r.at("tau_star").get<double>();
      row.cost_rate_star = r.at("cost_rate_star").get<double>();
      row.at_boundary = r.value("at_boundary", false);
      const Split sp = parse_split(r.value("split", std::string("unassigned")));
      any_split = any_split || sp != Split::Unassigned;
      split.push_back(sp);
      d.rows.push_back(std::move(row));
    }
    if (any_split) d.split = std::move(split);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed dataset JSON: ") + e.what());
  }
}

}  // namespace cbm
