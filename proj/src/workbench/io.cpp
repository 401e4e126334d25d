#include "rbe/workbench/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rbe/errors.hpp"

namespace rbe {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  os.precision(17);
  return os;
}

const char* kind_names[] = {"T1", "T2", "T3", "B"};

std::vector<BlockKind> all_kinds() {
  return {BlockKind::T1, BlockKind::T2, BlockKind::T3, BlockKind::B};
}

}  // namespace

void write_probes_csv(const std::string& path, const RunReport& report) {
  auto os = open_out(path);
  int nOut = 0;
  for (const auto& p : report.probes)
    nOut = std::max(nOut, static_cast<int>(p.outletFlowRates.size()));
  os << "time,inlet_pressure";
  for (int i = 0; i < nOut; ++i) os << ",flow_out_" << i;
  os << ",wss_mean,wss_max\n";
  for (const auto& p : report.probes) {
    os << p.time << ',' << p.inletPressure;
    for (int i = 0; i < nOut; ++i)
      os << ','
         << (i < static_cast<int>(p.outletFlowRates.size())
                 ? p.outletFlowRates[i]
                 : 0.0);
    double mean = 0, mx = 0;
    for (double w : p.wss) {
      mean += w;
      mx = std::max(mx, w);
    }
    if (!p.wss.empty()) mean /= static_cast<double>(p.wss.size());
    os << ',' << mean << ',' << mx << '\n';
  }
}

void write_report_csv(const std::string& path, const RunReport& report) {
  auto os = open_out(path);
  os << "time,newton_iters,krylov_iters\n";
  for (size_t k = 0; k < report.times.size(); ++k)
    os << report.times[k] << ',' << report.newtonIters[k] << ','
       << report.krylovIters[k] << '\n';
}

void write_timings_csv(const std::string& path, const RunReport& report) {
  auto os = open_out(path);
  os << "setup_seconds,solve_seconds\n";
  os << report.setupSeconds << ',' << report.solveSeconds << '\n';
}

void write_snapshot_store(const std::string& dir, const SnapshotStore& store) {
  fs::create_directories(dir);
  auto meta = open_out(dir + "/meta.txt");
  meta << "refinement = " << store.refinement << "\n";
  for (BlockKind kind : all_kinds()) {
    const auto itV = store.velocity.find(kind);
    if (itV == store.velocity.end()) continue;
    const std::string kn = kind_names[static_cast<int>(kind)];
    write_podm(dir + "/velocity_" + kn + ".podm", itV->second.columns);
    write_podm(dir + "/pressure_" + kn + ".podm",
               store.pressure.at(kind).columns);
    meta << "kind " << kn << " columns = " << itV->second.columns.cols()
         << "\n";
    for (size_t c = 0; c < itV->second.origins.size(); ++c)
      meta << "origin " << kn << ' ' << c << " = "
           << itV->second.origins[c].sample << ' '
           << itV->second.origins[c].step << "\n";
  }
  for (size_t s = 0; s < store.sampleParams.size(); ++s)
    for (size_t j = 0; j < store.sampleParams[s].size(); ++j) {
      const auto& p = store.sampleParams[s][j];
      meta << "sample " << s << " block " << j << " = " << p.rotation << ' '
           << p.translation.x() << ' ' << p.translation.y() << ' ' << p.bend
           << ' ' << p.lengthRatio << ' ' << p.radiusRatio << ' '
           << p.outletAngles[0] << ' ' << p.outletAngles[1] << "\n";
    }
  for (int s : store.failedSamples) meta << "failed " << s << "\n";
}

SnapshotStore read_snapshot_store(const std::string& dir) {
  SnapshotStore store;
  std::ifstream meta(dir + "/meta.txt");
  if (!meta) throw Error("cannot open snapshot store: " + dir);
  std::string line;
  std::map<std::string, BlockKind> byName;
  for (BlockKind k : all_kinds()) byName[kind_names[static_cast<int>(k)]] = k;
  while (std::getline(meta, line)) {
    std::istringstream is(line);
    std::string word;
    is >> word;
    if (word == "refinement") {
      std::string eq;
      is >> eq >> store.refinement;
    } else if (word == "kind") {
      std::string kn, eq;
      int cols = 0;
      is >> kn >> word >> eq >> cols;
      const BlockKind kind = byName.at(kn);
      auto& sv = store.velocity[kind];
      sv.kind = kind;
      sv.field = SnapshotField::Velocity;
      sv.columns = read_podm(dir + "/velocity_" + kn + ".podm");
      auto& sp = store.pressure[kind];
      sp.kind = kind;
      sp.field = SnapshotField::Pressure;
      sp.columns = read_podm(dir + "/pressure_" + kn + ".podm");
      sv.origins.resize(sv.columns.cols());
      sp.origins.resize(sp.columns.cols());
    } else if (word == "origin") {
      std::string kn, eq;
      size_t c;
      int sample, step;
      is >> kn >> c >> eq >> sample >> step;
      const BlockKind kind = byName.at(kn);
      store.velocity[kind].origins[c] = {sample, step};
      store.pressure[kind].origins[c] = {sample, step};
    } else if (word == "sample") {
      size_t s, j;
      std::string blockWord, eq;
      is >> s >> blockWord >> j >> eq;
      GeoParams p;
      is >> p.rotation >> p.translation.x() >> p.translation.y() >> p.bend >>
          p.lengthRatio >> p.radiusRatio >> p.outletAngles[0] >>
          p.outletAngles[1];
      if (store.sampleParams.size() <= s) store.sampleParams.resize(s + 1);
      if (store.sampleParams[s].size() <= j)
        store.sampleParams[s].resize(j + 1);
      store.sampleParams[s][j] = p;
    } else if (word == "failed") {
      int s;
      is >> s;
      store.failedSamples.push_back(s);
    }
  }
  return store;
}

void write_basis_set(const std::string& dir, const BasisSet& bases) {
  fs::create_directories(dir);
  auto meta = open_out(dir + "/meta.txt");
  for (BlockKind kind : all_kinds()) {
    const auto it = bases.velocity.find(kind);
    if (it == bases.velocity.end()) continue;
    const std::string kn = kind_names[static_cast<int>(kind)];
    write_podm(dir + "/velocity_" + kn + ".podm", it->second.modes);
    write_podm(dir + "/velocity_sv_" + kn + ".podm",
               DenseMatrix(it->second.singularValues));
    const auto& pb = bases.pressure.at(kind);
    write_podm(dir + "/pressure_" + kn + ".podm", pb.modes);
    write_podm(dir + "/pressure_sv_" + kn + ".podm",
               DenseMatrix(pb.singularValues));
    meta << "kind " << kn << " = " << it->second.nPod << ' '
         << it->second.nPressureSup << ' ' << it->second.nCouplingSup << ' '
         << it->second.epsilon << ' ' << pb.nPod << ' ' << pb.epsilon << "\n";
  }
}

BasisSet read_basis_set(const std::string& dir) {
  BasisSet out;
  std::ifstream meta(dir + "/meta.txt");
  if (!meta) throw Error("cannot open basis store: " + dir);
  std::map<std::string, BlockKind> byName;
  for (BlockKind k : all_kinds()) byName[kind_names[static_cast<int>(k)]] = k;
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream is(line);
    std::string word, kn, eq;
    is >> word >> kn >> eq;
    if (word != "kind") continue;
    const BlockKind kind = byName.at(kn);
    PodBasis vb;
    is >> vb.nPod >> vb.nPressureSup >> vb.nCouplingSup >> vb.epsilon;
    vb.modes = read_podm(dir + "/velocity_" + kn + ".podm");
    vb.singularValues = read_podm(dir + "/velocity_sv_" + kn + ".podm");
    PodBasis pb;
    is >> pb.nPod >> pb.epsilon;
    pb.modes = read_podm(dir + "/pressure_" + kn + ".podm");
    pb.singularValues = read_podm(dir + "/pressure_sv_" + kn + ".podm");
    out.velocity.emplace(kind, std::move(vb));
    out.pressure.emplace(kind, std::move(pb));
  }
  return out;
}

void write_field_dump(const std::string& path,
                      const std::vector<Eigen::VectorXd>& states) {
  if (states.empty()) return;
  DenseMatrix M(states[0].size(), static_cast<int>(states.size()));
  for (size_t k = 0; k < states.size(); ++k) M.col(static_cast<int>(k)) = states[k];
  write_podm(path, M);
}

void dump_block_operators(const std::string& dir, const GlobalSystem& sys) {
  fs::create_directories(dir);
  auto dump = [&](const std::string& name, const SpMat& A) {
    auto os = open_out(dir + "/" + name + ".txt");
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it)
        os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  };
  for (size_t j = 0; j < sys.blocks.size(); ++j) {
    const std::string pre = "block" + std::to_string(j) + "_";
    dump(pre + "M", sys.blocks[j].ops.M);
    dump(pre + "K", sys.blocks[j].ops.K);
    dump(pre + "D", sys.blocks[j].ops.D);
    dump(pre + "Xu", sys.blocks[j].ops.Xu);
    dump(pre + "Xp", sys.blocks[j].ops.Xp);
  }
}

}  // namespace rbe
