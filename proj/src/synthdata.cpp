#include "lindtomo/synthdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "lindtomo/error.hpp"
#include "lindtomo/parallel.hpp"
#include "lindtomo/rng.hpp"

namespace lindtomo {

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw SchemaError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void check_qubits(int n) {
  if (n != 1 && n != 2) throw DimensionError("only one- and two-qubit protocols are supported");
}

}  // namespace

SpamTruth ideal_spam(int n_qubits) {
  return {DensityMatrix::ground(n_qubits), Povm::projective(n_qubits)};
}

void Dataset::validate() const {
  check_qubits(n_qubits);
  if (times_us.empty() || times_us.front() != 0.0) {
    throw SchemaError("dataset times must start at 0");
  }
  if (!std::is_sorted(times_us.begin(), times_us.end()) ||
      std::adjacent_find(times_us.begin(), times_us.end()) != times_us.end()) {
    throw SchemaError("dataset times must be strictly increasing");
  }
  const std::set<double> known(times_us.begin(), times_us.end());
  const auto n_out = static_cast<std::size_t>(count_outcomes(n_qubits));
  for (const auto& r : records) {
    if (r.prep.n_qubits() != n_qubits || r.basis.n_qubits() != n_qubits) {
      throw SchemaError("record label '" + r.prep.str() + "/" + r.basis.str() +
                        "' does not match the qubit count");
    }
    if (!known.count(r.time_us)) throw SchemaError("record time not listed in times_us");
    if (r.counts.size() != n_out) throw SchemaError("record has the wrong number of outcomes");
    std::int64_t sum = 0;
    for (auto c : r.counts) {
      if (c < 0) throw SchemaError("negative count");
      sum += c;
    }
    if (sum != r.shots || r.shots <= 0) throw SchemaError("counts do not sum to shots");
  }
}

std::vector<const SequenceRecord*> Dataset::at_time(double t) const {
  std::vector<const SequenceRecord*> out;
  for (const auto& r : records) {
    if (r.time_us == t) out.push_back(&r);
  }
  return out;
}

std::vector<std::pair<PrepLabel, BasisLabel>> enumerate_sequences(int n_qubits) {
  check_qubits(n_qubits);
  std::vector<std::pair<PrepLabel, BasisLabel>> out;
  for (int s = 0; s < count_preps(n_qubits); ++s) {
    for (int b = 0; b < count_bases(n_qubits); ++b) {
      out.emplace_back(PrepLabel::from_index(s, n_qubits), BasisLabel::from_index(b, n_qubits));
    }
  }
  return out;
}

DensityMatrix ideal_prep_state(const PrepLabel& prep, const DensityMatrix& rho0) {
  if ((Eigen::Index{1} << prep.n_qubits()) != rho0.dim()) {
    throw DimensionError("preparation label does not match the state dimension");
  }
  const CMatrix r = prep.rotation();
  return DensityMatrix::trusted(hermitian_part(r * rho0.matrix() * r.adjoint()));
}

std::vector<double> outcome_probabilities(const CMatrix& rho, const BasisLabel& basis,
                                          const Povm& povm) {
  const CMatrix r = basis.rotation();
  if (r.rows() != rho.rows() || povm.dim() != rho.rows()) {
    throw DimensionError("basis label does not match the state dimension");
  }
  const CMatrix rotated = r * rho * r.adjoint();
  std::vector<double> p(povm.size());
  for (std::size_t o = 0; o < povm.size(); ++o) p[o] = outcome_prob(rotated, povm[o]);
  return p;
}

std::vector<std::int64_t> sample_counts(const std::vector<double>& probs, std::int64_t shots,
                                        std::uint64_t seed, std::uint64_t stream) {
  for (double p : probs) {
    if (!(p >= -1e-9 && p <= 1.0 + 1e-9)) {
      throw ModelError("outcome probability " + std::to_string(p) + " outside [0, 1]");
    }
  }
  std::vector<double> q(probs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) total += q[i] = std::clamp(probs[i], 0.0, 1.0);
  if (!(total > 0.0)) throw ModelError("outcome probabilities vanish");

  auto rng = stream_rng(seed, stream);
  std::vector<std::int64_t> counts(probs.size(), 0);
  std::int64_t left = shots;
  double mass = total;
  // Conditional binomials give an exact multinomial draw.
  for (std::size_t i = 0; i + 1 < q.size() && left > 0; ++i) {
    const double pi = mass > 0.0 ? std::clamp(q[i] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> bin(left, pi);
    counts[i] = bin(rng);
    left -= counts[i];
    mass -= q[i];
  }
  counts.back() += left;
  return counts;
}

namespace {

Dataset generate_impl(int n_qubits, const std::vector<double>& times,
                      const std::function<CMatrix(std::size_t, const CMatrix&)>& channel,
                      const SpamTruth& spam, std::int64_t shots, std::uint64_t seed) {
  if (shots < 1) throw ModelError("shots must be positive");
  if (times.empty() || times.front() != 0.0) throw SchemaError("time grid must start at 0");
  if (spam.rho0.dim() != (Eigen::Index{1} << n_qubits) || spam.povm.dim() != spam.rho0.dim()) {
    throw DimensionError("SPAM description does not match the qubit count");
  }
  const auto seqs = enumerate_sequences(n_qubits);
  Dataset data;
  data.n_qubits = n_qubits;
  data.times_us = times;
  data.shots_nominal = shots;
  data.records.resize(times.size() * seqs.size());

  std::vector<CMatrix> prepared;
  for (int s = 0; s < count_preps(n_qubits); ++s) {
    prepared.push_back(ideal_prep_state(PrepLabel::from_index(s, n_qubits), spam.rho0).matrix());
  }
  parallel_for(times.size(), [&](std::size_t ti) {
    std::vector<CMatrix> evolved(prepared.size());
    for (std::size_t s = 0; s < prepared.size(); ++s) evolved[s] = channel(ti, prepared[s]);
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      const auto& [prep, basis] = seqs[k];
      const std::size_t idx = ti * seqs.size() + k;
      auto& rec = data.records[idx];
      rec.prep = prep;
      rec.basis = basis;
      rec.time_us = times[ti];
      rec.shots = shots;
      const auto probs =
          outcome_probabilities(evolved[static_cast<std::size_t>(prep.index())], basis, spam.povm);
      rec.counts = sample_counts(probs, shots, seed, idx);
    }
  });
  return data;
}

}  // namespace

Dataset generate(const LindbladModel& truth, const SpamTruth& spam,
                 const std::vector<double>& times_us, std::int64_t shots, std::uint64_t seed) {
  const int n = qubits_for_dim(truth.dim());
  for (std::size_t i = 1; i < times_us.size(); ++i) {
    if (!(times_us[i] > times_us[i - 1])) throw SchemaError("time grid must be increasing");
  }
  const CMatrix gen = liouvillian(truth);
  std::vector<CMatrix> props(times_us.size());
  parallel_for(times_us.size(), [&](std::size_t i) { props[i] = expm(gen * times_us[i]); });
  return generate_impl(
      n, times_us,
      [&](std::size_t ti, const CMatrix& rho) {
        return hermitian_part(apply_superop(props[ti], rho));
      },
      spam, shots, seed);
}

Dataset generate_from_channels(const std::vector<KrausSet>& channels, const SpamTruth& spam,
                               std::int64_t shots, std::uint64_t seed) {
  if (channels.empty()) throw SchemaError("no channels given");
  std::vector<double> times;
  for (const auto& k : channels) times.push_back(k.time_us);
  const int n = qubits_for_dim(channels.front().dim);
  return generate_impl(
      n, times,
      [&](std::size_t ti, const CMatrix& rho) {
        return hermitian_part(kraus_apply(channels[ti], rho));
      },
      spam, shots, seed);
}

bool ExclusionFilter::matches(const SequenceRecord& r) const {
  if (prep && !(*prep == r.prep)) return false;
  if (basis && !(*basis == r.basis)) return false;
  if (time_us && std::abs(*time_us - r.time_us) > 1e-9 * std::max(1.0, std::abs(*time_us))) {
    return false;
  }
  return true;
}

ExclusionFilter parse_filter(std::string_view text) {
  ExclusionFilter f;
  if (text.empty()) throw SchemaError("empty exclusion filter");
  for (auto part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw SchemaError("exclusion filter term '" + std::string(part) + "' lacks '='");
    }
    const auto key = part.substr(0, eq);
    const auto value = part.substr(eq + 1);
    if (key == "prep") {
      f.prep = PrepLabel::parse(value);
    } else if (key == "basis") {
      f.basis = BasisLabel::parse(value);
    } else if (key == "time") {
      f.time_us = parse_double(value);
    } else {
      throw SchemaError("unknown exclusion key '" + std::string(key) + "'");
    }
  }
  return f;
}

Dataset exclude(const Dataset& data, const std::vector<ExclusionFilter>& filters) {
  Dataset out = data;
  if (filters.empty()) return out;
  for (const auto& f : filters) {
    if ((f.prep && f.prep->n_qubits() != data.n_qubits) ||
        (f.basis && f.basis->n_qubits() != data.n_qubits)) {
      throw SchemaError("exclusion filter label does not match the qubit count");
    }
  }
  out.records.clear();
  for (const auto& r : data.records) {
    const bool drop = std::any_of(filters.begin(), filters.end(),
                                  [&](const ExclusionFilter& f) { return f.matches(r); });
    if (!drop) out.records.push_back(r);
  }
  if (out.records.empty()) throw SchemaError("exclusion filters removed every record");
  return out;
}

Dataset marginal_dataset(const Dataset& data, int keep, const PrepLabel& other_prep,
                         const BasisLabel& other_basis) {
  if (data.n_qubits != 2 || (keep != 0 && keep != 1)) {
    throw DimensionError("marginal_dataset needs a two-qubit dataset");
  }
  const int other = 1 - keep;
  Dataset out;
  out.n_qubits = 1;
  out.times_us = data.times_us;
  out.shots_nominal = data.shots_nominal;
  for (const auto& r : data.records) {
    if (r.prep.symbols[static_cast<std::size_t>(other)] != other_prep.symbols.at(0) ||
        r.basis.symbols[static_cast<std::size_t>(other)] != other_basis.symbols.at(0)) {
      continue;
    }
    SequenceRecord m;
    m.prep.symbols = {r.prep.symbols[static_cast<std::size_t>(keep)]};
    m.basis.symbols = {r.basis.symbols[static_cast<std::size_t>(keep)]};
    m.time_us = r.time_us;
    m.shots = r.shots;
    m.counts.assign(2, 0);
    for (int o = 0; o < 4; ++o) {
      // Outcome bit of qubit 0 is the most significant.
      const int bit = keep == 0 ? (o >> 1) & 1 : o & 1;
      m.counts[static_cast<std::size_t>(bit)] += r.counts[static_cast<std::size_t>(o)];
    }
    out.records.push_back(std::move(m));
  }
  return out;
}

std::vector<double> parse_time_grid(std::string_view grid) {
  std::vector<double> t;
  const auto fields = split(grid, ':');
  if (fields.size() == 4 && (fields[0] == "lin" || fields[0] == "log")) {
    const double a = parse_double(fields[1]);
    const double b = parse_double(fields[2]);
    int n = 0;
    const auto* end = fields[3].data() + fields[3].size();
    auto [ptr, ec] = std::from_chars(fields[3].data(), end, n);
    if (ec != std::errc() || ptr != end || n < 2) {
      throw SchemaError("time grid needs at least 2 points");
    }
    if (fields[0] == "lin") {
      for (int i = 0; i < n; ++i) t.push_back(a + (b - a) * i / (n - 1));
    } else {
      if (!(a > 0.0) || !(b > a)) throw SchemaError("log grid needs 0 < first < last");
      t.push_back(0.0);
      if (n == 2) {
        t.push_back(b);
      } else {
        for (int i = 0; i < n - 1; ++i) t.push_back(a * std::pow(b / a, double(i) / (n - 2)));
      }
    }
  } else {
    for (auto v : split(grid, ',')) t.push_back(parse_double(v));
  }
  if (t.empty() || t.front() != 0.0) throw SchemaError("time grid must start at 0");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw SchemaError("time grid must be strictly increasing");
  }
  return t;
}

}  // namespace lindtomo
