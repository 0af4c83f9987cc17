#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mollify/asymptotics.hpp"
#include "mollify/calculus.hpp"
#include "mollify/characters.hpp"
#include "mollify/errors.hpp"
#include "mollify/lvalues.hpp"
#include "mollify/mollifiers.hpp"
#include "mollify/moments.hpp"
#include "mollify/numtheory.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mollify;
using mollifiers::CoefMap;
using mollifiers::MollifierSpec;
using cd = std::complex<double>;

namespace {

constexpr int kSchemaVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string command;
  std::vector<std::uint64_t> q;
  std::string q_range;
  std::uint64_t Q = 0;
  std::vector<double> theta{0.45};
  double theta1 = 0.3, theta2 = 0.2, eps0 = 0.05;
  std::string mollifier = "is", mollifier2;
  std::string coeffs, coeffs2;
  std::string p1 = "0,1", p2 = "0";
  std::string phi = "bump";
  std::string out;
  std::string format = "csv";
  std::uint64_t sieve_limit = numtheory::kDefaultSieveCap;
  unsigned workers = 1;
  std::uint64_t seed = 42;
  std::string cache_dir;
  std::string route = "afe";
  double delta = 0.1;
  std::string input;
  std::string basis = "truncation";
  unsigned basis_size = 5;
  bool duplicate = false;
  bool main_terms = false;
  std::vector<std::uint64_t> j{1};
  std::vector<double> y{1e4, 1e5, 1e6};
  std::vector<double> x;
  double contour = 1.5;
};

// ---- output

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Cell = std::variant<std::string, double, std::uint64_t>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string render_csv(const std::string& command, const Table& t) {
  std::string s = "# mollify-cli schema=" + std::to_string(kSchemaVersion) + " command=" + command + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      if (auto p = std::get_if<std::string>(&r[i])) s += *p;
      else if (auto d = std::get_if<double>(&r[i])) s += num(*d);
      else s += std::to_string(std::get<std::uint64_t>(r[i]));
    }
    s += '\n';
  }
  return s;
}

json stamp(const std::string& command) {
  json j;
  j["schema"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

std::string render_json_table(const std::string& command, const Table& t) {
  json j = stamp(command);
  j["columns"] = t.columns;
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::array();
    for (const auto& c : r) std::visit([&](const auto& v) { row.push_back(v); }, c);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string render_table(const ExperimentConfig& cfg, const Table& t) {
  return cfg.format == "json" ? render_json_table(cfg.command, t) : render_csv(cfg.command, t);
}

// Flattens a JSON object to "key,value" lines for --format csv.
void flatten(const json& j, const std::string& prefix, std::string& s) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, s);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), s);
  } else if (j.is_number_float()) {
    s += prefix + "," + num(j.get<double>()) + "\n";
  } else if (j.is_string()) {
    s += prefix + "," + j.get<std::string>() + "\n";
  } else {
    s += prefix + "," + j.dump() + "\n";
  }
}

std::string render_object(const ExperimentConfig& cfg, const json& j) {
  if (cfg.format == "json") return j.dump(2) + "\n";
  std::string s = "# mollify-cli schema=" + std::to_string(kSchemaVersion) + " command=" + cfg.command + "\nkey,value\n";
  flatten(j, "", s);
  return s;
}

json cjson(cd z) { return json::array({z.real(), z.imag()}); }

// ---- config helpers

std::vector<std::uint64_t> moduli(const ExperimentConfig& cfg) {
  std::set<std::uint64_t> s(cfg.q.begin(), cfg.q.end());
  if (!cfg.q_range.empty()) {
    const auto sep = cfg.q_range.find("..");
    if (sep == std::string::npos) throw ConfigError("--q-range expects A..B");
    std::uint64_t a = 0, b = 0;
    try {
      a = std::stoull(cfg.q_range.substr(0, sep));
      b = std::stoull(cfg.q_range.substr(sep + 2));
    } catch (const std::exception&) {
      throw ConfigError("--q-range expects A..B with integers");
    }
    if (a > b) throw ConfigError("--q-range is empty");
    for (std::uint64_t q = a; q <= b; ++q) s.insert(q);
  }
  for (auto q : s)
    if (q == 0) throw ConfigError("moduli must be positive");
  return {s.begin(), s.end()};
}

std::vector<std::uint64_t> require_moduli(const ExperimentConfig& cfg) {
  auto qs = moduli(cfg);
  if (qs.empty()) throw ConfigError("no moduli given (use --q or --q-range)");
  return qs;
}

void check_theta(double t, const char* name) {
  if (!(t > 0 && t < 0.5)) throw ConfigError(std::string(name) + " must lie in (0, 1/2)");
}

void check_sieve(const ExperimentConfig& cfg, double n) {
  if (n > double(cfg.sieve_limit))
    throw CapacityError("table size " + num(n) + " exceeds --sieve-limit " + std::to_string(cfg.sieve_limit));
}

mollifiers::Polynomial parse_poly(const std::string& s) {
  mollifiers::Polynomial p;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      p.c.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad polynomial coefficient '" + tok + "'");
    }
  }
  if (p.c.empty()) p.c.push_back(0.0);
  return p;
}

moments::Weight make_weight(const std::string& text) {
  // "bump" or "bump:<factor>"
  const auto colon = text.find(':');
  const std::string base = text.substr(0, colon);
  if (base != "bump") throw ConfigError("unknown --phi '" + text + "'");
  auto w = moments::default_weight();
  if (colon != std::string::npos) {
    double f = 0;
    try {
      f = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad --phi factor in '" + text + "'");
    }
    w = moments::scaled(w, f);
  }
  moments::validate_weight(w);
  return w;
}

lvalues::LRoute make_route(const std::string& r) {
  if (r == "afe") return lvalues::LRoute::Afe;
  if (r == "hurwitz") return lvalues::LRoute::Hurwitz;
  throw ConfigError("unknown --route '" + r + "'");
}

// ---- mollifier selection

MollifierSpec trivial() { return mollifiers::one_piece({{1, cd(1.0)}}, 1.0); }

MollifierSpec is_or_trivial(double y) { return y >= 2.0 ? mollifiers::iwaniec_sarnak(y) : trivial(); }

/// Builds M (slot 0) or N (slot 1) for modulus q.
MollifierSpec build_mollifier(const ExperimentConfig& cfg, const std::string& name, std::uint64_t q, double theta,
                              int slot) {
  const double lq = std::log(double(q));
  const double y = std::pow(double(q), theta);
  check_sieve(cfg, y);
  if (name == "trivial") return trivial();
  if (name == "is") return is_or_trivial(y);
  if (name == "is-long") {
    check_sieve(cfg, std::pow(double(q), theta + cfg.eps0));
    return is_or_trivial(std::pow(double(q), theta + cfg.eps0));
  }
  if (name == "mv") {
    if (y >= 2.0) return mollifiers::michel_vanderkam(y);
    return mollifiers::two_piece({{{1, 1}, cd(1.0)}}, {{{1, 1}, cd(1.0)}}, 1.0, 1.0);
  }
  if (name == "m1") return mollifiers::iwaniec_sarnak(std::pow(double(q), cfg.theta1));
  if (name == "m2") {
    const double y2 = std::pow(double(q), cfg.theta2);
    return mollifiers::two_piece({}, mollifiers::iwaniec_sarnak(y2).plain, y2, y2);
  }
  if (name == "bui") return mollifiers::bui(y, parse_poly(cfg.p1), parse_poly(cfg.p2), lq);
  if (name == "random-bui") {
    std::mt19937_64 rng(cfg.seed + std::uint64_t(slot));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    mollifiers::Polynomial a{{0, u(rng), u(rng), u(rng)}};
    mollifiers::Polynomial b{{0, u(rng), u(rng), u(rng)}};
    return mollifiers::bui(y, a, b, lq);
  }
  if (name == "file") {
    const std::string& path = slot == 0 ? cfg.coeffs : cfg.coeffs2;
    if (path.empty()) throw ConfigError(slot == 0 ? "--mollifier file needs --coeffs" : "--mollifier2 file needs --coeffs2");
    return mollifiers::bui_type(mollifiers::read_coefficient_file(path), y);
  }
  throw ConfigError("unknown mollifier '" + name + "'");
}

std::string second_name(const ExperimentConfig& cfg) { return cfg.mollifier2.empty() ? cfg.mollifier : cfg.mollifier2; }
// Without --mollifier2, N is a copy of M (same seed and coefficient file).
int second_slot(const ExperimentConfig& cfg) { return cfg.mollifier2.empty() ? 0 : 1; }

double target_for(const std::string& name, double theta) {
  if (name == "mv") return 1.0 / (1.0 + 1.0 / (2.0 * theta));
  if (name == "is" || name == "is-long") return 1.0 / (1.0 + 1.0 / theta);
  return std::nan("");
}

// ---- commands

std::string cmd_lvalues(const ExperimentConfig& cfg) {
  Table t{{"q", "char_id", "eps_re", "eps_im", "L_re", "L_im", "afe_vs_hurwitz_dev"}, {}};
  lvalues::AfeConfig afe;
  afe.kernel.contour = cfg.contour;
  for (auto q : require_moduli(cfg)) {
    auto fam = characters::even_primitive_family(q);
    if (fam.size() == 0) continue;
    auto hur = fam;
    lvalues::fill_l_values(fam, lvalues::LRoute::Afe, afe);
    lvalues::fill_l_values(hur, lvalues::LRoute::Hurwitz);
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const cd e = fam.root_numbers[Eigen::Index(i)], l = fam.l_values[Eigen::Index(i)];
      t.rows.push_back({q, fam.members[i].id(), e.real(), e.imag(), l.real(), l.imag(),
                        std::abs(l - hur.l_values[Eigen::Index(i)])});
    }
  }
  return render_table(cfg, t);
}

std::vector<Cell> moment_cells(std::uint64_t q, std::uint64_t phi_plus, const MomentSetd& ms) {
  return {q,           phi_plus,           ms.psi_m.real(),  ms.psi_m.imag(),         ms.psi_n.real(),
          ms.psi_n.imag(), ms.psi_mm,      ms.psi_mn.real(), ms.psi_mn.imag(),        ms.psi_nn,
          calculus::beta_m(ms), calculus::beta_n(ms)};
}

std::vector<std::string> split_header(const std::string& h) {
  std::vector<std::string> out;
  std::stringstream ss(h);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

struct MainRow {
  asymptotics::MainTermKind kind;
  double brute_raw;
};

std::string cmd_moments(const ExperimentConfig& cfg, moments::FamilyStore& store) {
  const double theta = cfg.theta.at(0);
  check_theta(theta, "--theta");
  const std::string n_name = second_name(cfg);
  Table t{split_header(moments::csv_header()), {}};
  Table mt{split_header(asymptotics::comparison_csv_header()), {}};

  for (auto q : moduli(cfg)) {
    auto fam = store.get(q);
    if (fam->size() == 0) continue;
    const auto m = build_mollifier(cfg, cfg.mollifier, q, theta, 0);
    const auto n = build_mollifier(cfg, n_name, q, theta, second_slot(cfg));
    const auto ms = moments::moment_set(q, m, n, *fam, cfg.workers);
    t.rows.push_back(moment_cells(q, fam->size(), ms));
    if (!cfg.main_terms) continue;

    const double count = double(fam->size());
    const auto ctx = asymptotics::MainTermContext::from_theta(q, theta);
    std::vector<MainRow> rows;
    CoefMap z;
    if (cfg.mollifier == "is") {
      rows = {{asymptotics::MainTermKind::IsFirst, ms.psi_m.real() * count},
              {asymptotics::MainTermKind::IsSecond, ms.psi_mm * count}};
    } else if (cfg.mollifier == "mv") {
      rows = {{asymptotics::MainTermKind::MvSecond, ms.psi_mm * count}};
    } else if (cfg.mollifier == "bui" || cfg.mollifier == "random-bui" || cfg.mollifier == "file") {
      z = m.plain;
      rows = {{asymptotics::MainTermKind::NFirst, ms.psi_m.real() * count}};
    } else {
      throw ConfigError("--main-terms supports is, mv, bui, random-bui and file");
    }
    for (const auto& r : rows) {
      const double main = asymptotics::main_term(r.kind, ctx, z).real();
      const auto c = asymptotics::compare(r.brute_raw, main);
      mt.rows.push_back({std::string(asymptotics::main_term_name(r.kind)), q, ctx.y1, ctx.y2, c.brute, c.main,
                         c.rel_dev});
    }
  }
  if (cfg.Q != 0) {
    const auto w = make_weight(cfg.phi);
    auto mf = [&](std::uint64_t q) { return build_mollifier(cfg, cfg.mollifier, q, theta, 0); };
    auto nf = [&](std::uint64_t q) { return build_mollifier(cfg, n_name, q, theta, second_slot(cfg)); };
    const auto ms = moments::moment_set_weighted(cfg.Q, w, mf, nf, store, cfg.workers);
    t.rows.push_back(moment_cells(cfg.Q, 0, ms));
  }
  if (t.rows.empty() && cfg.Q == 0 && moduli(cfg).empty()) throw ConfigError("no moduli given (use --q, --q-range or --Q)");
  return render_table(cfg, cfg.main_terms ? mt : t);
}

std::string cmd_beta_scan(const ExperimentConfig& cfg, moments::FamilyStore& store) {
  Table t{{"mollifier", "q", "theta", "beta", "target", "gap"}, {}};
  const auto qs = moduli(cfg);
  if (qs.empty() && cfg.Q == 0) throw ConfigError("no moduli given (use --q, --q-range or --Q)");
  for (double th : cfg.theta)
    if (!(th > 0 && th < 0.5)) throw ConfigError("--theta values must lie in (0, 1/2)");
  for (double th : cfg.theta) {
    const double target = target_for(cfg.mollifier, th);
    for (auto q : qs) {
      auto fam = store.get(q);
      if (fam->size() == 0) continue;
      const double b = moments::beta_q(q, build_mollifier(cfg, cfg.mollifier, q, th, 0), *fam, cfg.workers);
      t.rows.push_back({cfg.mollifier, q, th, b, target, std::abs(b - target)});
    }
    if (cfg.Q != 0) {
      const auto w = make_weight(cfg.phi);
      auto mf = [&](std::uint64_t q) { return build_mollifier(cfg, cfg.mollifier, q, th, 0); };
      const auto ms = moments::moment_set_weighted(cfg.Q, w, mf, mf, store, cfg.workers);
      const double b = calculus::beta_m(ms);
      t.rows.push_back({cfg.mollifier + "-weighted", cfg.Q, th, b, target, std::abs(b - target)});
    }
  }
  return render_table(cfg, t);
}

MomentSetd read_synthetic(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open --input " + path);
  std::map<std::string, double> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw ConfigError("input line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    const std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') throw ConfigError("input line " + std::to_string(lineno) + ": bad number");
    kv[k] = d;
  }
  auto get = [&](const char* k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError(std::string("input lacks ") + k);
    return it->second;
  };
  auto opt = [&](const char* k) {
    auto it = kv.find(k);
    return it == kv.end() ? 0.0 : it->second;
  };
  MomentSetd ms;
  ms.psi_m = {get("psi_m_re"), opt("psi_m_im")};
  ms.psi_n = {get("psi_n_re"), opt("psi_n_im")};
  ms.psi_mm = get("psi_mm");
  ms.psi_mn = {get("psi_mn_re"), opt("psi_mn_im")};
  ms.psi_nn = get("psi_nn");
  ms.provenance = Provenance::Synthetic;
  ms.label = "synthetic";
  return ms;
}

json report_json(const calculus::ComparisonReport<double>& r) {
  json j;
  const auto& ms = r.inputs;
  j["inputs"] = {{"psi_m", cjson(ms.psi_m)},   {"psi_n", cjson(ms.psi_n)},   {"psi_mm", ms.psi_mm},
                 {"psi_mn", cjson(ms.psi_mn)}, {"psi_nn", ms.psi_nn},        {"provenance", provenance_name(ms.provenance)},
                 {"label", ms.label}};
  j["delta"] = r.delta;
  j["beta_m"] = r.beta_m;
  j["beta_n"] = r.beta_n;
  j["alpha1"] = r.alpha1 ? cjson(*r.alpha1) : json(nullptr);
  j["beta_combined"] = r.beta_combined;
  j["verdict"] = calculus::verdict_name(r.verdict);
  json certs = json::array();
  for (const auto& c : r.certificates) certs.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}});
  j["certificates"] = std::move(certs);
  j["certified"] = r.certified;
  return j;
}

std::string cmd_compare(const ExperimentConfig& cfg, moments::FamilyStore& store) {
  json j = stamp(cfg.command);
  MomentSetd ms;
  if (!cfg.input.empty()) {
    ms = read_synthetic(cfg.input);
    j["source"] = "synthetic";
  } else {
    const auto qs = require_moduli(cfg);
    if (qs.size() != 1) throw ConfigError("compare takes a single modulus");
    const auto q = qs[0];
    const double theta = cfg.theta.at(0);
    check_theta(theta, "--theta");
    auto fam = store.get(q);
    if (fam->size() == 0) throw DomainError("no even primitive characters mod " + std::to_string(q));
    const auto m = build_mollifier(cfg, cfg.mollifier, q, theta, 0);
    const auto n = build_mollifier(cfg, second_name(cfg), q, theta, second_slot(cfg));
    ms = moments::moment_set(q, m, n, *fam, cfg.workers);
    j["source"] = "brute";
    j["q"] = q;
    j["theta"] = theta;
    j["mollifier_m"] = cfg.mollifier;
    j["mollifier_n"] = second_name(cfg);
  }
  j["report"] = report_json(calculus::classify(ms, cfg.delta));
  return render_object(cfg, j);
}

std::string cmd_optimize(const ExperimentConfig& cfg, moments::FamilyStore& store) {
  const auto qs = require_moduli(cfg);
  if (qs.size() != 1) throw ConfigError("optimize takes a single modulus");
  const auto q = qs[0];
  const double theta = cfg.theta.at(0);
  check_theta(theta, "--theta");
  if (cfg.basis_size == 0) throw ConfigError("--basis-size must be positive");
  auto fam = store.get(q);
  if (fam->size() == 0) throw DomainError("no even primitive characters mod " + std::to_string(q));

  const double y = std::pow(double(q), theta);
  check_sieve(cfg, y);
  if (y < 2) throw DomainError("q^theta must be at least 2 to build a basis");
  std::vector<MollifierSpec> basis;
  std::vector<std::string> labels;
  const unsigned K = cfg.basis_size;
  if (cfg.basis == "truncation") {
    const auto full = mollifiers::iwaniec_sarnak(y);
    for (unsigned k = 1; k <= K; ++k) {
      const double len = std::pow(y, double(k) / K);
      basis.push_back(k == K ? full : mollifiers::truncate(full, len));
      labels.push_back("is-truncated-" + num(len));
    }
  } else if (cfg.basis == "bui-atoms") {
    const double lq = std::log(double(q));
    for (unsigned k = 1; k <= K; ++k) {
      mollifiers::Polynomial atom{std::vector<double>(k + 1, 0.0)};
      atom.c[k] = 1.0;
      basis.push_back(mollifiers::bui(y, atom, {{0.0}}, lq));
      labels.push_back("p1-x^" + std::to_string(k));
      basis.push_back(mollifiers::bui(y, {{0.0}}, atom, lq));
      labels.push_back("p2-x^" + std::to_string(k));
    }
  } else {
    throw ConfigError("unknown --basis '" + cfg.basis + "'");
  }
  if (cfg.duplicate) {
    basis.push_back(basis.front());
    labels.push_back(labels.front() + "-copy");
  }

  const Eigen::Index n = Eigen::Index(basis.size());
  std::vector<Eigen::VectorXcd> lm;
  for (const auto& b : basis) lm.push_back(moments::lm_values(b, *fam, cfg.workers));
  Eigen::VectorXcd v(n);
  Eigen::MatrixXcd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i; k < n; ++k) {
      const auto ms = moments::moment_set_from_values(lm[std::size_t(i)], lm[std::size_t(k)]);
      if (k == i) {
        v[i] = ms.psi_m;
        A(i, i) = ms.psi_mm;
      } else {
        A(i, k) = ms.psi_mn;
        A(k, i) = std::conj(ms.psi_mn);
      }
    }
  }
  const auto opt = calculus::optimize_in_class<double>(v, A);
  const double resid = calculus::stationarity_residual<double>(v, A, opt.c);

  cd lead = 0;
  for (Eigen::Index i = 0; i < n && lead == cd(0); ++i) lead = opt.c[i];
  json j = stamp(cfg.command);
  j["q"] = q;
  j["theta"] = theta;
  j["basis"] = cfg.basis;
  json elems = json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    elems.push_back({{"label", labels[std::size_t(i)]},
                     {"beta", calculus::beta(v[i], A(i, i).real())},
                     {"c", cjson(opt.c[i])},
                     {"c_normalized", cjson(lead == cd(0) ? cd(0) : opt.c[i] / lead)}});
  }
  j["elements"] = std::move(elems);
  j["rank"] = std::uint64_t(opt.rank);
  j["beta"] = opt.beta_max;
  j["max_stationarity_residual"] = resid;
  return render_object(cfg, j);
}

std::string cmd_conrey(const ExperimentConfig& cfg) {
  Table t{{"variant", "j", "q", "y", "direct", "main", "abs_dev"}, {}};
  auto qs = moduli(cfg);
  if (qs.empty()) qs = {1};
  for (double y : cfg.y) check_sieve(cfg, y);
  for (auto v : {asymptotics::ConreyVariant::Plain, asymptotics::ConreyVariant::Log})
    for (auto jj : cfg.j)
      for (auto q : qs)
        for (double y : cfg.y) {
          const double d = asymptotics::conrey_direct(y, jj, q, v);
          const double m = asymptotics::conrey_main(y, jj, q, v);
          t.rows.push_back({std::string(v == asymptotics::ConreyVariant::Plain ? "plain" : "log"), jj, q, y, d, m,
                            std::abs(d - m)});
        }
  return render_table(cfg, t);
}

std::string cmd_kernels(const ExperimentConfig& cfg) {
  Table t{{"x", "v1", "v2", "f", "f_plus_f_inv"}, {}};
  std::vector<double> xs = cfg.x;
  if (xs.empty())
    for (int i = 0; i < 50; ++i) xs.push_back(std::pow(10.0, -2.0 + 4.0 * i / 49.0));
  lvalues::KernelConfig kc;
  kc.contour = cfg.contour;
  const lvalues::MellinKernel v1(lvalues::KernelKind::V1, kc), v2(lvalues::KernelKind::V2, kc),
      f(lvalues::KernelKind::F, kc);
  for (double x : xs) {
    if (!(x > 0)) throw ConfigError("--x values must be positive");
    t.rows.push_back({x, v1(x), v2(x), f(x), f(x) + f(1.0 / x)});
  }
  return render_table(cfg, t);
}

// ---- config file

const std::set<std::string> kPathKeys{"coeffs", "coeffs2", "out", "input", "cache-dir"};

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (k.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    std::replace(k.begin(), k.end(), '_', '-');
    if (kPathKeys.count(k) && !v.empty() && fs::path(v).is_relative()) v = (base / v).lexically_normal().string();
    kv.emplace_back(k, v);
  }
  return kv;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

const char* kFooter = R"(Output schema 1. CSV output starts with a '# mollify-cli schema=1 command=<name>' line;
JSON output carries "schema" and "command" fields and, for tables, "columns" and "rows".

Mollifiers (--mollifier for M, --mollifier2 for N, default N = M):
  trivial     M = 1
  is          x_b = mu(b)(1 - log b/log y), y = q^theta (trivial when y < 2)
  is-long     the same with y = q^(theta + eps0)
  mv          plain and root-number twisted pieces of the is shape, length q^theta (both 1 when y < 2)
  m1, m2      plain piece of length q^theta1, twisted piece of length q^theta2
  bui         P1 = --p1, P2 = --p2 (ascending coefficients), logscale log q
  random-bui  P1, P2 = (0, u, u, u), u uniform in [-1, 1] from --seed (a separate N uses seed + 1)
  file        'a b re [im]' rows from --coeffs (M) or --coeffs2 (N), length q^theta

Config file (--config): key=value lines, '#' comments, keys are long option names.
Flags on the command line override the file; coeffs, coeffs2, out, input and cache-dir
are resolved against the file's directory.)";

const char* kLvaluesDoc =
    "Columns: q, char_id (mixed-radix exponent id), eps_re, eps_im (root number), L_re, L_im (L(1/2, chi) by\n"
    "the approximate functional equation), afe_vs_hurwitz_dev (|AFE - Hurwitz|).";

const char* kMomentsDoc =
    "Columns: q, phi_plus (family size; 0 marks the --Q weighted row whose q column holds Q), psi_m_re,\n"
    "psi_m_im, psi_n_re, psi_n_im, psi_mm, psi_mn_re, psi_mn_im, psi_nn (averages over the family), beta_m,\n"
    "beta_n.\n"
    "With --main-terms: kind, q, y1, y2, brute, main, rel_dev, comparing raw sums with their main terms\n"
    "(is: is-first, is-second; mv: mv-second; bui, random-bui, file: n-first).";

const char* kBetaScanDoc =
    "Columns: mollifier (with a -weighted suffix for the --Q row, whose q column holds Q), q, theta, beta,\n"
    "target (1/(1+1/theta) for is, 1/(1+1/(2 theta)) for mv, nan otherwise), gap (|beta - target|).\n"
    "Rows are ordered by theta, then q.";

const char* kCompareDoc =
    "JSON fields: schema, command, source (brute or synthetic), q, theta, mollifier_m, mollifier_n, report\n"
    "{inputs {psi_m, psi_n, psi_mm, psi_mn, psi_nn, provenance, label}, delta, beta_m, beta_n, alpha1,\n"
    "beta_combined, verdict, certificates [{name, lhs, rhs, holds}], certified}. Complex values are [re, im].\n"
    "--input reads key=value lines psi_m_re, psi_m_im, psi_n_re, psi_n_im, psi_mm, psi_mn_re, psi_mn_im, psi_nn.\n"
    "With --format csv the same fields are printed as key,value rows.";

const char* kOptimizeDoc =
    "Bases: truncation (the is mollifier cut at y^(k/K), k = 1..K) or bui-atoms (P1 = x^k and P2 = x^k, k = 1..K).\n"
    "JSON fields: schema, command, q, theta, basis, elements [{label, beta, c, c_normalized}], rank, beta,\n"
    "max_stationarity_residual. The optimum is sum conj(c_i) M_i; c_normalized divides by the first nonzero c.";

const char* kConreyDoc =
    "Columns: variant (plain or log), j, q (default 1), y, direct, main, abs_dev.\n"
    "Rows are ordered by variant, j, q, y.";

const char* kKernelsDoc =
    "Columns: x, v1, v2, f, f_plus_f_inv (F(x) + F(1/x)). Default grid: 50 log-spaced points in [0.01, 100].";

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  // --config is handled before CLI11 so that file values can be spliced in ahead of the real flags.
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }

  ExperimentConfig cfg;
  CLI::App app{"Dirichlet L-values, mollified moments and mollifier comparisons", "mollify-cli"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string footer = std::string(kFooter) + "\n\nlvalues: " + kLvaluesDoc + "\n\nmoments: " + kMomentsDoc +
                       "\n\nbeta-scan: " + kBetaScanDoc + "\n\ncompare: " + kCompareDoc + "\n\noptimize: " +
                       kOptimizeDoc + "\n\nconrey: " + kConreyDoc + "\n\nkernels: " + kKernelsDoc;
  app.footer(footer);
  app.set_help_all_flag("--help-all", "Describe every command and its columns");
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--q", cfg.q, "Modulus or comma-separated moduli")->delimiter(',');
  app.add_option("--q-range", cfg.q_range, "Inclusive modulus range A..B");
  app.add_option("--Q", cfg.Q, "Weighted average over q in [Q/2, 2Q]");
  app.add_option("--theta", cfg.theta, "Length exponent(s); comma-separated for beta-scan")->delimiter(',');
  app.add_option("--theta1", cfg.theta1, "Plain-piece exponent for m1");
  app.add_option("--theta2", cfg.theta2, "Twisted-piece exponent for m2");
  app.add_option("--eps0", cfg.eps0, "Extra length exponent for is-long");
  app.add_option("--mollifier", cfg.mollifier, "Mollifier M (see below)");
  app.add_option("--mollifier2", cfg.mollifier2, "Mollifier N (see below)");
  app.add_option("--coeffs", cfg.coeffs, "Coefficient file for M");
  app.add_option("--coeffs2", cfg.coeffs2, "Coefficient file for N");
  app.add_option("--p1", cfg.p1, "Bui P1 coefficients");
  app.add_option("--p2", cfg.p2, "Bui P2 coefficients");
  app.add_option("--phi", cfg.phi, "Modulus weight: bump or bump:<factor>");
  app.add_option("--out", cfg.out, "Output path (default stdout)");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--sieve-limit", cfg.sieve_limit, "Largest arithmetic table the run may build");
  app.add_option("--workers", cfg.workers, "Threads per family (output does not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", cfg.seed, "Seed for random-bui");
  app.add_option("--cache-dir", cfg.cache_dir, "Directory for cached families with L-values");
  app.add_option("--route", cfg.route, "L-value route for moments: afe or hurwitz");

  auto* lv = app.add_subcommand("lvalues", "Central values of every even primitive character mod q");
  lv->footer(kLvaluesDoc);
  lv->add_option("--contour", cfg.contour, "Contour abscissa for the AFE kernel");

  auto* mo = app.add_subcommand("moments", "Family-averaged moments of L M and L N");
  mo->footer(kMomentsDoc);
  mo->add_flag("--main-terms", cfg.main_terms, "Emit brute-versus-main-term rows instead");

  auto* bs = app.add_subcommand("beta-scan", "beta_q(M) over a theta grid and modulus grid");
  bs->footer(kBetaScanDoc);

  auto* cp = app.add_subcommand("compare", "Classify the pair (M, N) and print the report");
  cp->footer(kCompareDoc);
  cp->add_option("--delta", cfg.delta, "Precision delta in [0, 1/2)");
  cp->add_option("--input", cfg.input, "Synthetic moment file instead of brute force");

  auto* op = app.add_subcommand("optimize", "Best combination within the span of a basis");
  op->footer(kOptimizeDoc);
  op->add_option("--basis", cfg.basis, "truncation or bui-atoms");
  op->add_option("--basis-size", cfg.basis_size, "K");
  op->add_flag("--duplicate", cfg.duplicate, "Append a copy of the first element");

  auto* cr = app.add_subcommand("conrey", "Moebius sums against their main terms");
  cr->footer(kConreyDoc);
  cr->add_option("--j", cfg.j, "Shift(s) j")->delimiter(',');
  cr->add_option("--y", cfg.y, "Length(s) y")->delimiter(',');

  auto* kn = app.add_subcommand("kernels", "The Mellin kernels V1, V2 and F");
  kn->footer(kKernelsDoc);
  kn->add_option("--x", cfg.x, "Evaluation point(s)")->delimiter(',');
  kn->add_option("--contour", cfg.contour, "Contour abscissa");

  try {
    if (!config_path.empty()) {
      std::vector<std::string> injected;
      std::string command;
      for (auto& [k, v] : read_config_file(config_path)) {
        if (k == "command") {
          command = v;
          continue;
        }
        if (k == "config") throw ConfigError("config files cannot nest");
        if (!given_on_command_line(args, k)) injected.push_back("--" + k + "=" + v);
      }
      bool has_sub = false;
      for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        if (std::find(args.begin(), args.end(), sub->get_name()) != args.end()) has_sub = true;
      if (!has_sub && !command.empty()) args.push_back(command);
      args.insert(args.begin(), injected.begin(), injected.end());
    }
  } catch (const std::exception& e) {
    std::cerr << "mollify-cli: " << e.what() << "\n";
    return 2;
  } catch (...) {
    return 2;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();

  try {
    std::unique_ptr<std::ofstream> file;
    if (!cfg.out.empty()) {
      file = std::make_unique<std::ofstream>(cfg.out, std::ios::binary | std::ios::trunc);
      if (!*file) throw IoError("cannot write " + cfg.out);
    }
    if (cfg.Q != 0 && cfg.Q < 3) throw ConfigError("--Q must be at least 3");
    if (!cfg.cache_dir.empty()) fs::create_directories(cfg.cache_dir);
    moments::FamilyStore store(cfg.cache_dir, make_route(cfg.route));

    std::string output;
    if (cfg.command == "lvalues") output = cmd_lvalues(cfg);
    else if (cfg.command == "moments") output = cmd_moments(cfg, store);
    else if (cfg.command == "beta-scan") output = cmd_beta_scan(cfg, store);
    else if (cfg.command == "compare") output = cmd_compare(cfg, store);
    else if (cfg.command == "optimize") output = cmd_optimize(cfg, store);
    else if (cfg.command == "conrey") output = cmd_conrey(cfg);
    else if (cfg.command == "kernels") output = cmd_kernels(cfg);

    if (file) {
      *file << output;
      file->flush();
      if (!*file) throw IoError("failed writing " + cfg.out);
    } else {
      std::cout << output;
      std::cout.flush();
    }
  } catch (const IoError& e) {
    std::cerr << "mollify-cli: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "mollify-cli: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mollify-cli: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
