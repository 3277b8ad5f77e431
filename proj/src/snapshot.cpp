#include "enkf/snapshot.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "enkf/errors.hpp"

namespace enkf {

namespace {

constexpr const char* kColumns = "index,time,m1,m2,re,im";

void write_header_value(std::ostream& out, const std::string& key, const std::string& value) {
  out << "# " << key << '=' << value << '\n';
}

std::string num(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

void write_common_header(std::ostream& out, const Dynamics& model) {
  write_header_value(out, "model", std::string(to_string(model.kind())));
  write_header_value(out, "dim", std::to_string(model.dim()));
}

std::size_t rows_per_state(const Dynamics& model) {
  if (const SpectralLayout* l = model.layout()) return l->num_modes();
  return static_cast<std::size_t>(model.dim());
}

}  // namespace

void write_block(std::ostream& out, const std::string& name, const Dynamics& model,
                 const SnapshotBlock& block) {
  if (block.states.size() != block.times.size()) {
    throw std::invalid_argument("write_block: states and times differ in length");
  }
  const auto old = out.precision(17);
  out << '[' << name << "]\n" << kColumns << '\n';
  const SpectralLayout* layout = model.layout();
  for (std::size_t s = 0; s < block.states.size(); ++s) {
    const StateVector& u = block.states[s];
    require_compatible(u, model.zero_state(), "write_block");
    if (layout != nullptr) {
      for (std::size_t i = 0; i < layout->num_modes(); ++i) {
        const auto& m = layout->mode(i);
        const auto c = layout->coefficient(u, m.m1, m.m2);
        out << s << ',' << block.times[s] << ',' << m.m1 << ',' << m.m2 << ',' << c.real() << ','
            << c.imag() << '\n';
      }
    } else {
      for (Eigen::Index i = 0; i < u.dim(); ++i) {
        out << s << ',' << block.times[s] << ',' << i << ",0," << u.data[i] << ",0\n";
      }
    }
  }
  out.precision(old);
}

SnapshotFile read_snapshot(std::istream& in, const Dynamics& model) {
  SnapshotFile f;
  std::string line;
  int lineno = 0;
  std::string current;
  const SpectralLayout* layout = model.layout();
  const std::size_t per_state = rows_per_state(model);
  std::size_t row_in_state = 0;
  auto bad = [&](const std::string& what) -> ConfigError {
    return ConfigError("snapshot:" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      f.header[key] = line.substr(eq + 1);
      continue;
    }
    if (line[0] == '[') {
      if (line.back() != ']') throw bad("malformed block marker");
      current = line.substr(1, line.size() - 2);
      f.blocks[current];
      if (!std::getline(in, line)) throw bad("missing column header");
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line != kColumns) throw bad("unexpected columns '" + line + "'");
      row_in_state = 0;
      continue;
    }
    if (current.empty()) throw bad("data before any block marker");
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw bad("expected 6 columns");
    std::size_t index = 0;
    int m1 = 0;
    int m2 = 0;
    double t = 0.0;
    double re = 0.0;
    double im = 0.0;
    try {
      index = std::stoul(fields[0]);
      t = std::stod(fields[1]);
      m1 = std::stoi(fields[2]);
      m2 = std::stoi(fields[3]);
      re = std::stod(fields[4]);
      im = std::stod(fields[5]);
    } catch (const std::exception&) {
      throw bad("non-numeric field");
    }
    SnapshotBlock& b = f.blocks[current];
    if (row_in_state == 0) {
      if (index != b.states.size()) throw bad("state indices must be consecutive from 0");
      b.states.push_back(model.zero_state());
      b.times.push_back(t);
    } else if (index + 1 != b.states.size()) {
      throw bad("incomplete state " + std::to_string(b.states.size() - 1));
    }
    StateVector& u = b.states.back();
    if (layout != nullptr) {
      const auto& m = layout->mode(row_in_state);
      if (m.m1 != m1 || m.m2 != m2) throw bad("unexpected wavevector order");
      u.data[static_cast<Eigen::Index>(2 * row_in_state)] = std::numbers::sqrt2 * re;
      u.data[static_cast<Eigen::Index>(2 * row_in_state + 1)] = std::numbers::sqrt2 * im;
    } else {
      if (m1 != static_cast<int>(row_in_state) || m2 != 0) throw bad("unexpected component order");
      u.data[static_cast<Eigen::Index>(row_in_state)] = re;
    }
    row_in_state = (row_in_state + 1) % per_state;
  }
  if (row_in_state != 0) throw ConfigError("snapshot: truncated final state");
  const auto it = f.header.find("model");
  if (it != f.header.end() && it->second != to_string(model.kind())) {
    throw ConfigError("snapshot: file is for model '" + it->second + "'");
  }
  const auto dim = f.header.find("dim");
  if (dim != f.header.end() && dim->second != std::to_string(model.dim())) {
    throw ConfigError("snapshot: file has dimension " + dim->second);
  }
  return f;
}

void write_attractor_sample(std::ostream& out, const Dynamics& model, const AttractorSample& s) {
  write_common_header(out, model);
  write_header_value(out, "spin_up", num(s.spin_up));
  write_header_value(out, "stride", num(s.stride));
  SnapshotBlock b;
  b.states = s.states;
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    b.times.push_back(s.spin_up + static_cast<double>(i) * s.stride);
  }
  write_block(out, "states", model, b);
}

AttractorSample read_attractor_sample(std::istream& in, const Dynamics& model) {
  SnapshotFile f = read_snapshot(in, model);
  AttractorSample s;
  const auto it = f.blocks.find("states");
  if (it == f.blocks.end()) throw ConfigError("snapshot: missing [states] block");
  s.states = std::move(it->second.states);
  try {
    if (f.header.count("spin_up")) s.spin_up = std::stod(f.header["spin_up"]);
    if (f.header.count("stride")) s.stride = std::stod(f.header["stride"]);
  } catch (const std::exception&) {
    throw ConfigError("snapshot: bad spin_up/stride header");
  }
  return s;
}

void write_truth(std::ostream& out, const Dynamics& model, const TruthRun& truth,
                 const ObservationOperator& op, const std::vector<std::string>& extra_header) {
  for (const auto& h : extra_header) out << "# " << h << '\n';
  write_common_header(out, model);
  write_header_value(out, "h", num(truth.h));
  write_header_value(out, "gamma", num(truth.gamma));
  write_header_value(out, "steps_per_observation", std::to_string(truth.steps_per_observation));
  write_header_value(out, "observation", std::string(to_string(op.kind)));
  write_header_value(out, "ring_radius", std::to_string(op.ring_radius));
  write_header_value(out, "ring_inclusive", op.inclusive ? "1" : "0");
  SnapshotBlock states{truth.states, {}};
  for (std::size_t j = 0; j < truth.states.size(); ++j) {
    states.times.push_back(static_cast<double>(j) * truth.h);
  }
  write_block(out, "states", model, states);
  SnapshotBlock obs{truth.observations, {}};
  for (std::size_t j = 0; j < truth.observations.size(); ++j) {
    obs.times.push_back(static_cast<double>(j + 1) * truth.h);
  }
  write_block(out, "observations", model, obs);
}

TruthRun read_truth(std::istream& in, const Dynamics& model, ObservationOperator* op_out) {
  SnapshotFile f = read_snapshot(in, model);
  auto need = [&](const std::string& k) -> const std::string& {
    const auto it = f.header.find(k);
    if (it == f.header.end()) throw ConfigError("truth file: missing header '" + k + "'");
    return it->second;
  };
  TruthRun t;
  ObservationOperator op;
  try {
    t.h = std::stod(need("h"));
    t.gamma = std::stod(need("gamma"));
    t.steps_per_observation = std::stoi(need("steps_per_observation"));
    op.kind = parse_observation_kind(need("observation"));
    op.ring_radius = std::stoi(need("ring_radius"));
    op.inclusive = need("ring_inclusive") == "1";
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("truth file: bad header value: ") + e.what());
  }
  if (!f.blocks.count("states") || !f.blocks.count("observations")) {
    throw ConfigError("truth file: needs [states] and [observations] blocks");
  }
  t.states = std::move(f.blocks["states"].states);
  t.observations = std::move(f.blocks["observations"].states);
  if (t.states.empty() || t.observations.size() + 1 != t.states.size()) {
    throw ConfigError("truth file: expected one more state than observations");
  }
  t.mask = bind_observation(op, model);
  if (op_out != nullptr) *op_out = op;
  return t;
}

}  // namespace enkf
