#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace bshrink::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  for (std::string& s : out) {
    const size_t b = s.find_first_not_of(" \t");
    const size_t e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  size_t column(const std::string& name, const fs::path& path) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    fail(ErrorCode::IoError, path.string() + ": missing column '" + name + "'");
  }
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  CsvTable t;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineno << ": expected " << t.header.size() << " cells, got "
          << cells.size();
      fail(ErrorCode::IoError, msg.str());
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) fail(ErrorCode::IoError, path.string() + ": empty file");
  return t;
}

double parse_double(const std::string& s, const fs::path& path) {
  if (s.empty()) fail(ErrorCode::IoError, path.string() + ": empty numeric cell");
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) fail(ErrorCode::IoError, path.string() + ": not a number: '" + s + "'");
  return v;
}

std::vector<std::string> numbered(const char* prefix, Eigen::Index p) {
  std::vector<std::string> out;
  for (Eigen::Index j = 1; j <= p; ++j) out.push_back(prefix + std::to_string(j));
  return out;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector json_vec(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

// NaN and infinities print as null in nlohmann; keep that explicit.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char* me_variant_name(model::MeVariant v) {
  return v == model::MeVariant::Scalar ? "scalar" : "per_gene";
}

model::MeVariant parse_me_variant(const std::string& s) {
  if (s == "scalar") return model::MeVariant::Scalar;
  if (s == "per_gene") return model::MeVariant::PerGene;
  fail(ErrorCode::ConfigError, "unknown me_variant '" + s + "'");
}

const char* lambda_status_name(model::LambdaStatus s) {
  switch (s) {
    case model::LambdaStatus::Fixed: return "fixed";
    case model::LambdaStatus::SampledDAplus: return "sampled";
    case model::LambdaStatus::EwigEstimated: return "ewig";
  }
  return "unknown";
}

void put_le(std::string& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int k = 0; k < 8; ++k) buf.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= std::uint64_t(p[k]) << (8 * k);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_dataset(const model::Dataset& data, const fs::path& csv, const fs::path& sidecar) {
  data.validate();
  const Eigen::Index p = data.p();
  const auto xs = numbered("x", p);
  const auto ws = numbered("w", p);
  std::string text = "subsample,y";
  for (const auto& n : xs) text += "," + n;
  for (const auto& n : ws) text += "," + n;
  text += "\n";
  auto row = [&](const char* label, double y, const double* x, const Matrix& w, Eigen::Index i) {
    text += label;
    text += "," + format_double(y);
    for (Eigen::Index j = 0; j < p; ++j) text += "," + (x ? format_double(x[j]) : std::string());
    for (Eigen::Index j = 0; j < p; ++j) text += "," + format_double(w(i, j));
    text += "\n";
  };
  for (Eigen::Index i = 0; i < data.n_a(); ++i) {
    const Vector x = data.x_a.row(i).transpose();
    row("A", data.y_a[i], x.data(), data.w_a, i);
  }
  for (Eigen::Index i = 0; i < data.n_b(); ++i) row("B", data.y_b[i], nullptr, data.w_b, i);
  write_text(csv, text);

  json side = {{"format", "bshrink-dataset"},
               {"version", 1},
               {"csv", csv.filename().string()},
               {"p", p},
               {"n_a", data.n_a()},
               {"n_b", data.n_b()},
               {"roles", {{"subsample", "subsample"}, {"y", "y"}, {"x", xs}, {"w", ws}}}};
  write_json(sidecar, side);
}

model::Dataset read_dataset(const fs::path& sidecar) {
  const json side = read_json(sidecar);
  model::Dataset d;
  try {
    fs::path csv = side.at("csv").get<std::string>();
    if (csv.is_relative()) csv = sidecar.parent_path() / csv;
    const json& roles = side.at("roles");
    const auto xs = roles.at("x").get<std::vector<std::string>>();
    const auto ws = roles.at("w").get<std::vector<std::string>>();
    if (xs.size() != ws.size() || xs.empty())
      fail(ErrorCode::DimensionError, "dataset roles: x and w must name the same p >= 1 columns");
    const CsvTable t = read_csv(csv);
    const size_t c_sub = t.column(roles.at("subsample").get<std::string>(), csv);
    const size_t c_y = t.column(roles.at("y").get<std::string>(), csv);
    std::vector<size_t> c_x, c_w;
    for (const auto& n : xs) c_x.push_back(t.column(n, csv));
    for (const auto& n : ws) c_w.push_back(t.column(n, csv));
    const Eigen::Index p = static_cast<Eigen::Index>(xs.size());

    std::vector<const std::vector<std::string>*> a, b;
    for (const auto& r : t.rows) {
      if (r[c_sub] == "A") a.push_back(&r);
      else if (r[c_sub] == "B") b.push_back(&r);
      else fail(ErrorCode::IoError, csv.string() + ": subsample label must be A or B");
    }
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nb = static_cast<Eigen::Index>(b.size());
    d.y_a.resize(na);
    d.x_a.resize(na, p);
    d.w_a.resize(na, p);
    d.y_b.resize(nb);
    d.w_b.resize(nb, p);
    for (Eigen::Index i = 0; i < na; ++i) {
      const auto& r = *a[static_cast<size_t>(i)];
      d.y_a[i] = parse_double(r[c_y], csv);
      for (Eigen::Index j = 0; j < p; ++j) {
        d.x_a(i, j) = parse_double(r[c_x[static_cast<size_t>(j)]], csv);
        d.w_a(i, j) = parse_double(r[c_w[static_cast<size_t>(j)]], csv);
      }
    }
    for (Eigen::Index i = 0; i < nb; ++i) {
      const auto& r = *b[static_cast<size_t>(i)];
      d.y_b[i] = parse_double(r[c_y], csv);
      for (Eigen::Index j = 0; j < p; ++j)
        d.w_b(i, j) = parse_double(r[c_w[static_cast<size_t>(j)]], csv);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, sidecar.string() + ": " + e.what());
  }
  d.validate();
  return d;
}

Matrix read_matrix_csv(const fs::path& path, const std::vector<std::string>& names) {
  const CsvTable t = read_csv(path);
  std::vector<size_t> cols;
  if (names.empty()) {
    for (size_t i = 0; i < t.header.size(); ++i) cols.push_back(i);
  } else {
    for (const auto& n : names) cols.push_back(t.column(n, path));
  }
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (size_t i = 0; i < t.rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j)
      m(Eigen::Index(i), Eigen::Index(j)) = parse_double(t.rows[i][cols[j]], path);
  return m;
}

simlab::SimConfig sim_config_from_json(const json& j) {
  using simlab::SimConfig;
  if (!j.is_object()) fail(ErrorCode::ConfigError, "config must be a JSON object");
  static const std::vector<std::string> known = {
      "profile", "n_a", "n_b", "p", "beta_pattern", "beta_custom", "r2", "beta0", "taus", "tau",
      "rho", "psi", "nu", "violation", "replicates", "validation_n", "methods", "seed",
      "threads", "p_lo", "p_hi", "noise", "chain"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");

  try {
    const std::string profile = get_or<std::string>(j, "profile", "desk");
    SimConfig c;
    if (profile == "desk") c = simlab::desk_profile();
    else if (profile == "paper") c = simlab::paper_profile();
    else fail(ErrorCode::ConfigError, "profile must be desk or paper");

    c.n_a = get_or(j, "n_a", c.n_a);
    c.n_b = get_or(j, "n_b", c.n_b);
    c.p = get_or(j, "p", c.p);
    if (j.contains("beta_pattern"))
      c.beta_pattern = simlab::parse_beta_pattern(j["beta_pattern"].get<std::string>());
    if (j.contains("beta_custom")) {
      c.beta_custom = json_vec(j["beta_custom"]);
      if (!j.contains("beta_pattern")) c.beta_pattern = simlab::BetaPattern::Custom;
    }
    c.r2 = get_or(j, "r2", c.r2);
    c.beta0 = get_or(j, "beta0", c.beta0);
    if (j.contains("taus") && j.contains("tau"))
      fail(ErrorCode::ConfigError, "give either tau or taus, not both");
    if (j.contains("taus")) c.taus = j["taus"].get<std::vector<double>>();
    if (j.contains("tau")) c.taus = {j["tau"].get<double>()};
    c.rho = get_or(j, "rho", c.rho);
    c.psi = get_or(j, "psi", c.psi);
    c.nu = get_or(j, "nu", c.nu);
    if (j.contains("violation"))
      c.violation = simlab::parse_violation(j["violation"].get<std::string>());
    c.replicates = get_or(j, "replicates", c.replicates);
    c.validation_n = get_or(j, "validation_n", c.validation_n);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) c.methods.push_back(simlab::Estimator::parse(m.get<std::string>()));
    }
    c.seed = get_or(j, "seed", c.seed);
    c.threads = get_or(j, "threads", c.threads);
    c.p_lo = get_or(j, "p_lo", c.p_lo);
    c.p_hi = get_or(j, "p_hi", c.p_hi);
    if (j.contains("noise")) {
      const std::string n = j["noise"];
      if (n == "stddev") c.noise = inference::NoiseScale::StdDev;
      else if (n == "variance") c.noise = inference::NoiseScale::Variance;
      else fail(ErrorCode::ConfigError, "noise must be stddev or variance");
    }
    if (j.contains("chain")) {
      const json& ch = j["chain"];
      for (const auto& [key, _] : ch.items())
        if (key != "burn_in" && key != "stored_draws" && key != "ewig_block" &&
            key != "me_variant")
          fail(ErrorCode::ConfigError, "unknown chain key '" + key + "'");
      c.chain.burn_in = get_or(ch, "burn_in", c.chain.burn_in);
      c.chain.stored_draws = get_or(ch, "stored_draws", c.chain.stored_draws);
      c.chain.ewig_block = get_or(ch, "ewig_block", c.chain.ewig_block);
      if (ch.contains("me_variant"))
        c.chain.me_variant = parse_me_variant(ch["me_variant"].get<std::string>());
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
}

json sim_config_to_json(const simlab::SimConfig& c) {
  json methods = json::array();
  for (const auto& m : c.methods) methods.push_back(m.name());
  json j = {{"n_a", c.n_a},
            {"n_b", c.n_b},
            {"p", c.p},
            {"beta_pattern", simlab::to_string(c.beta_pattern)},
            {"r2", c.r2},
            {"beta0", c.beta0},
            {"taus", c.taus},
            {"rho", c.rho},
            {"psi", c.psi},
            {"nu", c.nu},
            {"violation", simlab::to_string(c.violation)},
            {"replicates", c.replicates},
            {"validation_n", c.validation_n},
            {"methods", methods},
            {"seed", c.seed},
            {"p_lo", c.p_lo},
            {"p_hi", c.p_hi},
            {"noise", c.noise == inference::NoiseScale::StdDev ? "stddev" : "variance"},
            {"chain",
             {{"burn_in", c.chain.burn_in},
              {"stored_draws", c.chain.stored_draws},
              {"ewig_block", c.chain.ewig_block},
              {"me_variant", me_variant_name(c.chain.me_variant)}}}};
  if (c.beta_pattern == simlab::BetaPattern::Custom) j["beta_custom"] = vec_json(c.beta_custom);
  return j;
}

std::string results_csv(const simlab::ExperimentResult& result, const ResultsOptions& opt) {
  std::string text =
      "tau,replicate,method,seed,stream,ok,error,sigma2,mspe_ppm,mspe_pm,coverage,width,lambda";
  text += opt.timing ? ",seconds\n" : "\n";
  for (const auto& r : result.records) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    text += format_double(r.tau) + "," + std::to_string(r.replicate) + "," + r.method + "," +
            std::to_string(r.seed) + "," + std::to_string(r.stream) + "," + (r.ok ? "1" : "0") +
            "," + err + "," + format_double(r.sigma2) + "," + format_double(r.mspe_ppm) + "," +
            format_double(r.mspe_pm) + "," + format_double(r.coverage) + "," +
            format_double(r.width) + "," + format_double(r.lambda);
    if (opt.timing) text += "," + format_double(r.seconds);
    text += "\n";
  }
  return text;
}

json summary_json(const simlab::ExperimentResult& result) {
  json by_tau = json::array();
  for (double tau : result.config.taus) {
    json methods = json::object();
    for (const auto& m : result.config.methods) {
      const simlab::Aggregate& a = result.aggregate(tau, m.name());
      methods[a.method] = {{"mspe_mean", num(a.mspe_mean)},
                           {"mspe_se", num(a.mspe_se)},
                           {"mspe_pm_mean", num(a.mspe_pm_mean)},
                           {"coverage_mean", num(a.coverage_mean)},
                           {"width_mean", num(a.width_mean)},
                           {"n_ok", a.n_ok},
                           {"n_excluded", a.n_excluded}};
    }
    by_tau.push_back({{"tau", tau}, {"methods", methods}});
  }
  return {{"format", "bshrink-summary"}, {"version", 1}, {"results", by_tau}};
}

void write_experiment(const simlab::ExperimentResult& result, const fs::path& dir,
                      const ResultsOptions& opt) {
  fs::create_directories(dir);
  write_text(dir / "results.csv", results_csv(result, opt));
  write_json(dir / "summary.json", summary_json(result));
  write_json(dir / "config.json", sim_config_to_json(result.config));
}

json fit_summary_json(const model::Dataset& data, const sampler::ChainOutput& chain,
                      const sampler::ChainConfig& config,
                      const inference::PosteriorSummary& summary) {
  double sigma2 = 0.0, tau2 = 0.0;
  for (const auto& d : chain.draws) {
    sigma2 += d.sigma2;
    tau2 += d.me.tau2;
  }
  const double t = static_cast<double>(chain.draws.size());
  const model::Hyper& h = chain.final_hyper;
  const sampler::MethodTraits tr = sampler::traits(chain.method);
  return {{"format", "bshrink-fit"},
          {"version", 1},
          {"method", sampler::to_string(chain.method)},
          {"p", data.p()},
          {"n_a", data.n_a()},
          {"n_b", data.n_b()},
          {"seed", chain.seed},
          {"stream", chain.stream},
          {"burn_in", config.burn_in},
          {"stored_draws", config.stored_draws},
          {"ewig_block", config.ewig_block},
          {"me_variant", me_variant_name(config.me_variant)},
          {"beta0_hat", summary.beta0_hat},
          {"beta_ppm", vec_json(summary.beta_ppm)},
          {"beta_pm", vec_json(summary.beta_pm)},
          {"sigma2_mean", sigma2 / t},
          {"tau2_mean", tau2 / t},
          {"lambda", tr.beta_prior == model::BetaPrior::Ridge ? json(h.lambda) : json(nullptr)},
          {"lambda_status", lambda_status_name(h.lambda_status)},
          {"Lambda", tr.adaptive_sigma_x ? vec_json(h.Lambda) : json(nullptr)},
          {"diagnostics", {{"tau2_rate_floored", chain.diagnostics.tau2_rate_floored}}}};
}

void write_draws(const sampler::ChainOutput& chain, const fs::path& bin, const fs::path& sidecar) {
  if (chain.draws.empty()) fail(ErrorCode::InvalidParameter, "no draws to write");
  const auto t = static_cast<long>(chain.draws.size());
  const Eigen::Index p = chain.draws.front().beta.size();
  const Eigen::Index q = chain.draws.front().me.psi.size();
  std::string buf;
  json blocks = json::array();
  auto block = [&](const char* name, std::vector<long> shape, auto&& emit) {
    blocks.push_back({{"name", name}, {"shape", shape}, {"offset", buf.size()}});
    emit();
  };
  const auto& D = chain.draws;
  block("beta0", {t}, [&] { for (const auto& d : D) put_le(buf, d.beta0); });
  block("beta", {t, long(p)}, [&] {
    for (const auto& d : D) for (Eigen::Index j = 0; j < p; ++j) put_le(buf, d.beta[j]);
  });
  block("sigma2", {t}, [&] { for (const auto& d : D) put_le(buf, d.sigma2); });
  block("psi", {t, long(q)}, [&] {
    for (const auto& d : D) for (Eigen::Index j = 0; j < q; ++j) put_le(buf, d.me.psi[j]);
  });
  block("nu", {t, long(q)}, [&] {
    for (const auto& d : D) for (Eigen::Index j = 0; j < q; ++j) put_le(buf, d.me.nu[j]);
  });
  block("tau2", {t}, [&] { for (const auto& d : D) put_le(buf, d.me.tau2); });
  block("mu_x", {t, long(p)}, [&] {
    for (const auto& d : D) for (Eigen::Index j = 0; j < p; ++j) put_le(buf, d.mu_x[j]);
  });
  block("sigma_x_inv", {t, long(p), long(p)}, [&] {
    for (const auto& d : D)
      for (Eigen::Index r = 0; r < p; ++r)
        for (Eigen::Index c = 0; c < p; ++c) put_le(buf, d.sigma_x_inv.matrix()(r, c));
  });
  block("lambda_trace", {long(chain.lambda_trace.size())},
        [&] { for (double v : chain.lambda_trace) put_le(buf, v); });
  block("Lambda_trace", {long(chain.Lambda_trace.size()), long(p)}, [&] {
    for (const auto& v : chain.Lambda_trace) for (Eigen::Index j = 0; j < p; ++j) put_le(buf, v[j]);
  });
  block("xb_mean", {long(chain.xb_mean.rows()), long(chain.xb_mean.cols())}, [&] {
    for (Eigen::Index r = 0; r < chain.xb_mean.rows(); ++r)
      for (Eigen::Index c = 0; c < chain.xb_mean.cols(); ++c) put_le(buf, chain.xb_mean(r, c));
  });
  write_text(bin, buf);

  const model::Hyper& h = chain.final_hyper;
  json side = {{"format", "bshrink-draws"},
               {"version", 1},
               {"file", bin.filename().string()},
               {"byte_order", "little"},
               {"dtype", "float64"},
               {"layout", "row-major"},
               {"bytes", buf.size()},
               {"method", sampler::to_string(chain.method)},
               {"me_variant", me_variant_name(chain.draws.front().me.variant)},
               {"seed", chain.seed},
               {"stream", chain.stream},
               {"iterations", chain.iterations},
               {"final_lambda", h.lambda},
               {"final_Lambda", vec_json(h.Lambda)},
               {"blocks", blocks}};
  write_json(sidecar, side);
}

sampler::ChainOutput read_draws(const fs::path& sidecar) {
  const json side = read_json(sidecar);
  try {
    if (side.at("byte_order") != "little" || side.at("dtype") != "float64")
      fail(ErrorCode::IoError, "draws: unsupported byte order or dtype");
    fs::path bin = side.at("file").get<std::string>();
    if (bin.is_relative()) bin = sidecar.parent_path() / bin;
    const std::string raw = read_text(bin);
    if (raw.size() != side.at("bytes").get<size_t>())
      fail(ErrorCode::IoError, bin.string() + ": size does not match sidecar");

    std::map<std::string, std::pair<size_t, std::vector<long>>> blocks;
    for (const auto& b : side.at("blocks"))
      blocks[b.at("name")] = {b.at("offset").get<size_t>(), b.at("shape").get<std::vector<long>>()};
    auto at = [&](const char* name, size_t index) {
      const auto it = blocks.find(name);
      if (it == blocks.end()) fail(ErrorCode::IoError, std::string("draws: missing block ") + name);
      const size_t off = it->second.first + 8 * index;
      if (off + 8 > raw.size()) fail(ErrorCode::IoError, "draws: block out of range");
      return get_le(reinterpret_cast<const unsigned char*>(raw.data()) + off);
    };
    auto shape = [&](const char* name, size_t k) -> long {
      const auto& s = blocks.at(name).second;
      return k < s.size() ? s[k] : 0;
    };

    sampler::ChainOutput out;
    out.method = sampler::parse_method(side.at("method"));
    out.seed = side.at("seed");
    out.stream = side.at("stream");
    out.iterations = side.at("iterations");
    const long t = shape("beta0", 0);
    const Eigen::Index p = shape("beta", 1);
    const Eigen::Index q = shape("psi", 1);
    const model::MeVariant variant = parse_me_variant(side.at("me_variant"));
    for (long s = 0; s < t; ++s) {
      Vector beta(p), mu(p), psi(q), nu(q);
      Matrix prec(p, p);
      for (Eigen::Index j = 0; j < p; ++j) {
        beta[j] = at("beta", size_t(s * p + j));
        mu[j] = at("mu_x", size_t(s * p + j));
        for (Eigen::Index k = 0; k < p; ++k) prec(j, k) = at("sigma_x_inv", size_t((s * p + j) * p + k));
      }
      for (Eigen::Index j = 0; j < q; ++j) {
        psi[j] = at("psi", size_t(s * q + j));
        nu[j] = at("nu", size_t(s * q + j));
      }
      const double tau2 = at("tau2", size_t(s));
      model::MeParams me = variant == model::MeVariant::Scalar
                               ? model::MeParams::scalar(psi[0], nu[0], tau2)
                               : model::MeParams::per_gene(psi, nu, tau2);
      out.draws.push_back(model::Phi{at("beta0", size_t(s)), std::move(beta),
                                     at("sigma2", size_t(s)), std::move(me), std::move(mu),
                                     stat::SpdMatrix(std::move(prec))});
    }
    for (long s = 0; s < shape("lambda_trace", 0); ++s)
      out.lambda_trace.push_back(at("lambda_trace", size_t(s)));
    for (long s = 0; s < shape("Lambda_trace", 0); ++s) {
      Vector v(p);
      for (Eigen::Index j = 0; j < p; ++j) v[j] = at("Lambda_trace", size_t(s * p + j));
      out.Lambda_trace.push_back(std::move(v));
    }
    const long rows = shape("xb_mean", 0), cols = shape("xb_mean", 1);
    out.xb_mean.resize(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) out.xb_mean(r, c) = at("xb_mean", size_t(r * cols + c));
    out.final_hyper.lambda = side.at("final_lambda");
    out.final_hyper.Lambda = json_vec(side.at("final_Lambda"));
    return out;
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, sidecar.string() + ": " + e.what());
  }
}

}  // namespace bshrink::io
