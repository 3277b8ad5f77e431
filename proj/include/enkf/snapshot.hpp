#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "enkf/dynamics.hpp"
#include "enkf/observation.hpp"

namespace enkf {

/// Snapshot files: `# key=value` header lines, then one or more blocks
///
///   [states]
///   index,time,m1,m2,re,im
///
/// with one row per stored coefficient. nse2d rows carry the wavevector and
/// Re/Im of u_m; ODE rows use m1 = component, m2 = 0, im = 0. Truth files add
/// an [observations] block (index j observes time j h).
struct SnapshotBlock {
  std::vector<StateVector> states;
  std::vector<double> times;
};

void write_block(std::ostream& out, const std::string& name, const Dynamics& model,
                 const SnapshotBlock& block);

void write_attractor_sample(std::ostream& out, const Dynamics& model, const AttractorSample& s);
AttractorSample read_attractor_sample(std::istream& in, const Dynamics& model);

void write_truth(std::ostream& out, const Dynamics& model, const TruthRun& truth,
                 const ObservationOperator& op,
                 const std::vector<std::string>& extra_header = {});
/// Throws ConfigError if the file does not match the model.
TruthRun read_truth(std::istream& in, const Dynamics& model, ObservationOperator* op = nullptr);

/// Header key/value pairs and named blocks of a snapshot stream.
struct SnapshotFile {
  std::map<std::string, std::string> header;
  std::map<std::string, SnapshotBlock> blocks;
};
SnapshotFile read_snapshot(std::istream& in, const Dynamics& model);

}  // namespace enkf
