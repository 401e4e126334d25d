#include "rbe/workbench/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "rbe/errors.hpp"

namespace rbe {

KrylovConfig Scenario::krylovConfig() const {
  KrylovConfig k;
  if (krylovMethod == "fgmres")
    k.method = KrylovConfig::Method::Fgmres;
  else if (krylovMethod == "gmres")
    k.method = KrylovConfig::Method::Gmres;
  else
    throw ConfigError("unknown krylov.method: " + krylovMethod);
  k.tol = krylovTol;
  k.restart = krylovRestart;
  k.maxIters = krylovMaxIters;
  return k;
}

PrecondConfig Scenario::precondConfig() const {
  PrecondConfig p;
  if (inner == "direct")
    p.inner = InnerSolveMode::Direct;
  else if (inner == "simple")
    p.inner = InnerSolveMode::Simple;
  else if (inner == "gmres")
    p.inner = InnerSolveMode::InnerGmres;
  else
    throw ConfigError("unknown krylov.inner: " + inner);
  p.innerTol = innerTol;
  p.schurReuse = schurReuse;
  return p;
}

NewtonConfig Scenario::newtonConfig() const {
  NewtonConfig n;
  n.tol = newtonTol;
  n.maxIters = newtonMaxIters;
  if (linearization == "newton")
    n.linearization = Linearization::Newton;
  else if (linearization == "picard")
    n.linearization = Linearization::Picard;
  else
    throw ConfigError("unknown newton.linearization: " + linearization);
  return n;
}

namespace {

struct KeyValue {
  std::string value;
  bool used = false;
};

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t at = 0;
    const double d = std::stod(v, &at);
    if (at != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    size_t at = 0;
    const int i = std::stoi(v, &at);
    if (at != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::pair<double, double>> parse_samples(const std::string& key,
                                                     const std::string& v) {
  // "t0:q0, t1:q1, ..."
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("bad waveform sample in " + key + ": '" + item + "'");
    out.emplace_back(to_double(key, trim(item.substr(0, colon))),
                     to_double(key, trim(item.substr(colon + 1))));
  }
  if (out.size() < 2)
    throw ConfigError(key + ": need at least two waveform samples");
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i].first <= out[i - 1].first)
      throw ConfigError(key + ": sample times must increase");
  return out;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  std::map<std::string, KeyValue> kv;
  std::istringstream is(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineNo) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineNo) +
                        ": empty key or value");
    if (kv.count(key))
      throw ConfigError("duplicate key: " + key);
    kv[key] = {value, false};
  }

  Scenario sc;
  auto take = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    it->second.used = true;
    return &it->second.value;
  };
  auto dbl = [&](const std::string& key, double& dst) {
    if (const auto* v = take(key)) dst = to_double(key, *v);
  };
  auto integer = [&](const std::string& key, int& dst) {
    if (const auto* v = take(key)) dst = to_int(key, *v);
  };
  auto str = [&](const std::string& key, std::string& dst) {
    if (const auto* v = take(key)) dst = *v;
  };
  auto boolean = [&](const std::string& key, bool& dst) {
    if (const auto* v = take(key)) dst = to_bool(key, *v);
  };

  dbl("fluid.density", sc.density);
  dbl("fluid.viscosity", sc.viscosity);
  dbl("time.dt", sc.dt);
  dbl("time.t0", sc.t0);
  dbl("time.end", sc.tEnd);
  dbl("time.ramp_start", sc.rampStart);
  integer("time.bdf_order", sc.bdfOrder);
  dbl("inflow.rate", sc.inflowRate);
  str("inflow.waveform", sc.waveform);
  if (const auto* v = take("inflow.samples"))
    sc.waveformSamples = parse_samples("inflow.samples", *v);
  integer("coupling.order", sc.multiplierOrder);
  integer("mesh.refinement", sc.refinement);
  dbl("newton.tol", sc.newtonTol);
  integer("newton.max_iters", sc.newtonMaxIters);
  str("newton.linearization", sc.linearization);
  str("krylov.method", sc.krylovMethod);
  dbl("krylov.tol", sc.krylovTol);
  integer("krylov.restart", sc.krylovRestart);
  integer("krylov.max_iters", sc.krylovMaxIters);
  str("krylov.inner", sc.inner);
  dbl("krylov.inner_tol", sc.innerTol);
  integer("krylov.schur_reuse", sc.schurReuse);
  dbl("rom.eps_u", sc.rom.epsU);
  dbl("rom.eps_p", sc.rom.epsP);
  if (const auto* v = take("rom.convective")) {
    if (*v == "exact")
      sc.rom.truncated = false;
    else if (*v == "truncated")
      sc.rom.truncated = true;
    else
      throw ConfigError("rom.convective must be exact or truncated");
  }
  integer("rom.nc", sc.rom.nc);
  boolean("rom.supremizers.pressure", sc.rom.pressureSupremizers);
  boolean("rom.supremizers.coupling", sc.rom.couplingSupremizers);
  boolean("rom.identity_basis", sc.rom.identityBasis);

  // block.N.field keys
  int nBlocks = 0;
  for (const auto& [key, val] : kv) {
    (void)val;
    if (key.rfind("block.", 0) != 0) continue;
    const auto dot = key.find('.', 6);
    if (dot == std::string::npos)
      throw ConfigError("bad block key: " + key);
    nBlocks = std::max(nBlocks, to_int(key, key.substr(6, dot - 6)) + 1);
  }
  for (int i = 0; i < nBlocks; ++i) {
    const std::string pre = "block." + std::to_string(i) + ".";
    BlockSpec bs;
    const auto* kindv = take(pre + "kind");
    if (!kindv) throw ConfigError("missing key " + pre + "kind");
    try {
      bs.kind = block_kind_from_string(*kindv);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    integer(pre + "parent", bs.parent);
    integer(pre + "parent_port", bs.parentPort);
    dbl(pre + "bend", bs.params.bend);
    dbl(pre + "length_ratio", bs.params.lengthRatio);
    dbl(pre + "out_angle0", bs.params.outletAngles[0]);
    dbl(pre + "out_angle1", bs.params.outletAngles[1]);
    const bool isRoot = bs.parent < 0;
    if (const auto* v = take(pre + "radius_ratio")) {
      if (!isRoot)
        throw ConfigError(pre +
                          "radius_ratio: derived from the parent port width "
                          "for non-root blocks");
      bs.params.radiusRatio = to_double(pre + "radius_ratio", *v);
    }
    if (const auto* v = take(pre + "rotation")) {
      if (!isRoot) throw ConfigError(pre + "rotation: root-only key");
      bs.params.rotation = to_double(pre + "rotation", *v);
    }
    if (const auto* v = take(pre + "tx")) {
      if (!isRoot) throw ConfigError(pre + "tx: root-only key");
      bs.params.translation.x() = to_double(pre + "tx", *v);
    }
    if (const auto* v = take(pre + "ty")) {
      if (!isRoot) throw ConfigError(pre + "ty: root-only key");
      bs.params.translation.y() = to_double(pre + "ty", *v);
    }
    sc.blocks.push_back(bs);
  }

  for (const auto& [key, val] : kv)
    if (!val.used) throw ConfigError("unknown key: " + key);

  // structural validation
  if (sc.blocks.empty()) throw ConfigError("no blocks defined");
  if (sc.blocks[0].parent != -1)
    throw ConfigError("block.0 must be the root (no parent)");
  for (size_t i = 1; i < sc.blocks.size(); ++i) {
    const auto& b = sc.blocks[i];
    if (b.parent < 0) throw ConfigError("only block.0 may be the root");
    if (b.parent >= static_cast<int>(i))
      throw ConfigError("block parents must precede their children");
  }
  if (sc.dt <= 0) throw ConfigError("time.dt must be positive");
  if (sc.t0 >= sc.tEnd) throw ConfigError("time.t0 must be before time.end");
  if (sc.rampStart > sc.t0) throw ConfigError("ramp must start at or before t0");
  if (sc.bdfOrder != 1 && sc.bdfOrder != 2)
    throw ConfigError("time.bdf_order must be 1 or 2");
  if (sc.multiplierOrder < 0) throw ConfigError("coupling.order must be >= 0");
  if (sc.refinement < 1) throw ConfigError("mesh.refinement must be >= 1");
  if (sc.waveform != "halfsine" && sc.waveform != "constant" &&
      sc.waveform != "samples")
    throw ConfigError("inflow.waveform must be halfsine, constant or samples");
  if (sc.waveform == "samples" && sc.waveformSamples.empty())
    throw ConfigError("inflow.waveform = samples requires inflow.samples");
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario_text(ss.str());
}

}  // namespace rbe
