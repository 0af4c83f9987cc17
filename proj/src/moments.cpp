#include "mollify/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "mollify/errors.hpp"
#include "mollify/numtheory.hpp"
#include "mollify/summation.hpp"

namespace mollify::moments {

namespace {

void check_family(std::uint64_t q, const CharacterFamily& fam) {
  if (fam.q != q) throw PreconditionError("family modulus " + std::to_string(fam.q) + " does not match q = " +
                                          std::to_string(q));
  if (!fam.has_l_values()) throw PreconditionError("family mod " + std::to_string(q) + " has no L-values");
}

double beta_of(cd psi, double psi_mm) { return psi_mm > 0 ? std::norm(psi) / psi_mm : 0.0; }

struct RawMoments {
  cd m, n, mn;
  double mm = 0, nn = 0;
};

RawMoments raw_moments(const Eigen::VectorXcd& lm, const Eigen::VectorXcd& ln) {
  if (lm.size() != ln.size()) throw PreconditionError("value vectors differ in length");
  CompensatedSum<cd> sm, sn, smn;
  CompensatedSum<double> smm, snn;
  for (Eigen::Index i = 0; i < lm.size(); ++i) {
    sm += lm[i];
    sn += ln[i];
    smm += std::norm(lm[i]);
    snn += std::norm(ln[i]);
    smn += lm[i] * std::conj(ln[i]);
  }
  return {sm.value(), sn.value(), smn.value(), smm.value(), snn.value()};
}

std::string route_tag(lvalues::LRoute route, const lvalues::AfeConfig& cfg) {
  if (route == lvalues::LRoute::Hurwitz) return "hurwitz";
  char buf[64];
  std::snprintf(buf, sizeof buf, "afe:%.3g", cfg.tail_tolerance);
  return buf;
}

}  // namespace

Eigen::VectorXcd lm_values(const MollifierSpec& m, const CharacterFamily& fam, unsigned workers) {
  if (!fam.has_l_values()) throw PreconditionError("family mod " + std::to_string(fam.q) + " has no L-values");
  return fam.l_values.cwiseProduct(mollifiers::evaluate_family(m, fam, workers));
}

cd psi_first(std::uint64_t q, const MollifierSpec& m, const CharacterFamily& fam, unsigned workers) {
  check_family(q, fam);
  const auto lm = lm_values(m, fam, workers);
  CompensatedSum<cd> s;
  for (Eigen::Index i = 0; i < lm.size(); ++i) s += lm[i];
  return s.value();
}

cd psi_second(std::uint64_t q, const MollifierSpec& m, const MollifierSpec& n, const CharacterFamily& fam,
              unsigned workers) {
  check_family(q, fam);
  const auto lm = lm_values(m, fam, workers);
  const auto ln = lm_values(n, fam, workers);
  return raw_moments(lm, ln).mn;
}

double beta_q(std::uint64_t q, const MollifierSpec& m, const CharacterFamily& fam, unsigned workers) {
  check_family(q, fam);
  const auto lm = lm_values(m, fam, workers);
  const auto r = raw_moments(lm, lm);
  return beta_of(r.m, r.mm * static_cast<double>(lm.size()));
}

MomentSetd moment_set_from_values(const Eigen::VectorXcd& lm, const Eigen::VectorXcd& ln) {
  const auto r = raw_moments(lm, ln);
  MomentSetd ms;
  ms.provenance = Provenance::Brute;
  if (lm.size() == 0) return ms;
  const double n = static_cast<double>(lm.size());
  ms.psi_m = r.m / n;
  ms.psi_n = r.n / n;
  ms.psi_mm = r.mm / n;
  ms.psi_nn = r.nn / n;
  ms.psi_mn = r.mn / n;
  return ms;
}

MomentSetd moment_set(std::uint64_t q, const MollifierSpec& m, const MollifierSpec& n, const CharacterFamily& fam,
                      unsigned workers) {
  check_family(q, fam);
  auto ms = moment_set_from_values(lm_values(m, fam, workers), lm_values(n, fam, workers));
  ms.label = "q=" + std::to_string(q);
  return ms;
}

Weight default_weight() {
  return {[](double x) {
            if (!(x > 0.5 && x < 2.0)) return 0.0;
            const double t = (4.0 * x - 5.0) / 3.0;
            return 2.0 * std::exp(1.0 - 1.0 / (1.0 - t * t));
          },
          "bump"};
}

Weight scaled(const Weight& w, double factor) {
  auto f = w.phi;
  return {[f, factor](double x) { return factor * f(x); }, w.name + "*" + std::to_string(factor)};
}

void validate_weight(const Weight& w) {
  if (!w.phi) throw ConfigError("weight function is empty");
  constexpr int kPerUnit = 4096;
  for (int k = 0; k <= 4 * kPerUnit; ++k) {
    const double x = double(k) / kPerUnit;
    const double v = w.phi(x);
    if (!std::isfinite(v) || v < 0) throw ConfigError("weight is negative or non-finite at x = " + std::to_string(x));
    if ((x <= 0.5 || x >= 2.0) && v != 0.0)
      throw ConfigError("weight does not vanish outside (1/2, 2) at x = " + std::to_string(x));
  }
  if (!(w.phi(1.0) >= 1.0)) throw ConfigError("weight must satisfy phi(1) >= 1");
}

FamilyStore::FamilyStore(std::string cache_dir, lvalues::LRoute route, lvalues::AfeConfig cfg, std::size_t keep)
    : dir_(std::move(cache_dir)), route_(route), cfg_(cfg), keep_(std::max<std::size_t>(1, keep)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::shared_ptr<const CharacterFamily> FamilyStore::get(std::uint64_t q) {
  if (auto it = live_.find(q); it != live_.end()) return it->second;
  const std::string tag = route_tag(route_, cfg_);
  std::shared_ptr<CharacterFamily> fam;
  std::filesystem::path file;
  if (!dir_.empty()) {
    file = std::filesystem::path(dir_) / ("family-" + std::to_string(q) + ".txt");
    if (std::ifstream in(file); in) {
      try {
        std::string got;
        auto f = read_family_cache(in, &got);
        if (got == tag && f.q == q) {
          fam = std::make_shared<CharacterFamily>(std::move(f));
          ++loaded_;
        }
      } catch (const ConfigError&) {
        // stale or damaged; rebuild below
      }
    }
  }
  if (!fam) {
    fam = std::make_shared<CharacterFamily>(characters::even_primitive_family(q));
    lvalues::fill_l_values(*fam, route_, cfg_);
    ++built_;
    if (!file.empty()) {
      const auto tmp = file.string() + ".tmp";
      {
        std::ofstream out(tmp);
        write_family_cache(out, *fam, tag);
      }
      std::filesystem::rename(tmp, file);
    }
  }
  live_[q] = fam;
  order_.push_back(q);
  while (order_.size() > keep_) {
    live_.erase(order_.front());
    order_.erase(order_.begin());
  }
  return fam;
}

void write_family_cache(std::ostream& out, const CharacterFamily& fam, const std::string& tag) {
  out << kFamilyCacheMagic << ' ' << kFamilyCacheVersion << " q=" << fam.q << " count=" << fam.size()
      << " route=" << tag << '\n';
  char buf[160];
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const cd l = fam.has_l_values() ? fam.l_values[ii] : cd(std::nan(""), std::nan(""));
    std::snprintf(buf, sizeof buf, "%llu %.17g %.17g %.17g %.17g\n",
                  static_cast<unsigned long long>(fam.members[i].id()), fam.root_numbers[ii].real(),
                  fam.root_numbers[ii].imag(), l.real(), l.imag());
    out << buf;
  }
}

CharacterFamily read_family_cache(std::istream& in, std::string* tag) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("family cache: missing header");
  std::istringstream hs(line);
  std::string magic, qs, cs, rs;
  int version = 0;
  if (!(hs >> magic >> version >> qs >> cs >> rs) || magic != kFamilyCacheMagic)
    throw ConfigError("family cache: bad header");
  if (version != kFamilyCacheVersion)
    throw ConfigError("family cache: version " + std::to_string(version) + " not supported");
  if (qs.rfind("q=", 0) != 0 || cs.rfind("count=", 0) != 0 || rs.rfind("route=", 0) != 0)
    throw ConfigError("family cache: bad header fields");
  std::uint64_t q = 0, count = 0;
  try {
    q = std::stoull(qs.substr(2));
    count = std::stoull(cs.substr(6));
  } catch (const std::exception&) {
    throw ConfigError("family cache: bad header numbers");
  }
  if (q < 1 || count != numtheory::even_primitive_count(q)) throw ConfigError("family cache: count mismatch");
  if (tag) *tag = rs.substr(6);

  CharacterFamily fam;
  fam.q = q;
  fam.group = characters::group_for(q);
  fam.root_numbers.resize(static_cast<Eigen::Index>(count));
  fam.l_values.resize(static_cast<Eigen::Index>(count));
  bool have_l = true;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw ConfigError("family cache: truncated");
    std::istringstream ls(line);
    unsigned long long id;
    double er, ei, lr, li;
    if (!(ls >> id >> er >> ei >> lr >> li)) throw ConfigError("family cache: bad row " + std::to_string(i + 1));
    characters::DirichletCharacter chi = [&] {
      try {
        return characters::character_from_id(q, id);
      } catch (const std::exception&) {
        throw ConfigError("family cache: bad character id " + std::to_string(id));
      }
    }();
    if (!chi.even() || !chi.primitive()) throw ConfigError("family cache: id " + std::to_string(id) + " not even primitive");
    if (q <= characters::kMaterializeBound) chi.materialize();
    fam.members.push_back(std::move(chi));
    const auto ii = static_cast<Eigen::Index>(i);
    fam.root_numbers[ii] = {er, ei};
    fam.l_values[ii] = {lr, li};
    if (std::isnan(lr) || std::isnan(li)) have_l = false;
  }
  if (!have_l) fam.l_values.resize(0);
  std::unordered_map<std::uint64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < fam.size(); ++i)
    if (!by_id.emplace(fam.members[i].id(), i).second) throw ConfigError("family cache: duplicate id");
  fam.conj_index.resize(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) fam.conj_index[i] = by_id.at(fam.members[i].conj().id());
  return fam;
}

MomentSetd moment_set_weighted(std::uint64_t Q, const Weight& w, const MollifierForQ& m, const MollifierForQ& n,
                               FamilyStore& store, unsigned workers) {
  if (Q < 3) throw DomainError("Q must be at least 3");
  validate_weight(w);
  CompensatedSum<cd> sm, sn, smn;
  CompensatedSum<double> smm, snn, sw;
  for (std::uint64_t q = (Q + 1) / 2; q <= 2 * Q; ++q) {
    const double phi = w.phi(double(q) / double(Q));
    if (phi == 0.0) continue;
    const std::uint64_t count = numtheory::even_primitive_count(q);
    if (count == 0) continue;
    const double wq = phi * double(q) / double(numtheory::euler_phi(q));
    const auto fam = store.get(q);
    const auto lm = lm_values(m(q), *fam, workers);
    const auto ln = lm_values(n(q), *fam, workers);
    const auto r = raw_moments(lm, ln);
    sm += wq * r.m;
    sn += wq * r.n;
    smn += wq * r.mn;
    smm += wq * r.mm;
    snn += wq * r.nn;
    sw += wq * double(count);
  }
  MomentSetd ms;
  ms.provenance = Provenance::Weighted;
  ms.label = "Q=" + std::to_string(Q);
  const double W = sw.value();
  if (W == 0.0) return ms;
  ms.psi_m = sm.value() / W;
  ms.psi_n = sn.value() / W;
  ms.psi_mm = smm.value() / W;
  ms.psi_nn = snn.value() / W;
  ms.psi_mn = smn.value() / W;
  return ms;
}

double beta_weighted(std::uint64_t Q, const Weight& w, const MollifierSpec& m, FamilyStore& store, unsigned workers) {
  auto same = [&m](std::uint64_t) { return m; };
  const auto ms = moment_set_weighted(Q, w, same, same, store, workers);
  return beta_of(ms.psi_m, ms.psi_mm);
}

std::string csv_header() {
  return "q,phi_plus,psi_m_re,psi_m_im,psi_n_re,psi_n_im,psi_mm,psi_mn_re,psi_mn_im,psi_nn,beta_m,beta_n";
}

std::string csv_row(std::uint64_t q, std::uint64_t phi_plus, const MomentSetd& ms) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%llu,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                static_cast<unsigned long long>(q), static_cast<unsigned long long>(phi_plus), ms.psi_m.real(),
                ms.psi_m.imag(), ms.psi_n.real(), ms.psi_n.imag(), ms.psi_mm, ms.psi_mn.real(), ms.psi_mn.imag(),
                ms.psi_nn, beta_of(ms.psi_m, ms.psi_mm), beta_of(ms.psi_n, ms.psi_nn));
  return buf;
}

CauchySchwarzSides cauchy_schwarz_sides(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v,
                                        const Eigen::VectorXd& w) {
  if (u.size() != v.size() || u.size() != w.size()) throw PreconditionError("vectors differ in length");
  CompensatedSum<double> uu, vv;
  CompensatedSum<cd> uv;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    uu += w[i] * std::norm(u[i]);
    vv += w[i] * std::norm(v[i]);
    uv += w[i] * u[i] * std::conj(v[i]);
  }
  const double nu = uu.value(), nv = vv.value();
  const cd ip = uv.value();
  CauchySchwarzSides s{nu * nv - std::norm(ip), 0.0};
  if (nv == 0.0) return s;
  CompensatedSum<double> rr;
  for (Eigen::Index i = 0; i < u.size(); ++i) rr += w[i] * std::norm(nv * u[i] - ip * v[i]);
  s.residual_form = rr.value() / nv;
  return s;
}

}  // namespace mollify::moments
