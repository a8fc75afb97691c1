// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/metrics.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <regex>
#include <sstream>
#include <tuple>

#include "mave/enhance.h"
#include "mave/error.h"
#include "mave/fft.h"

namespace mave {

double SiSdrDb(std::span<const double> estimate,
               std::span<const double> reference) {
  return -10.0 * SisdrLoss(estimate, reference);
}

// ---------------------------------------------------------------------------
// STOI

namespace {

constexpr int kStoiFs = 10000;
constexpr std::size_t kStoiFrame = 256;
constexpr std::size_t kStoiHop = 128;
constexpr std::size_t kStoiFft = 512;
constexpr std::size_t kStoiBands = 15;
constexpr double kStoiMinFreq = 150.0;
constexpr std::size_t kStoiSegment = 30;  // 384 ms
constexpr double kStoiBeta = -15.0;
constexpr double kStoiDynRange = 40.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Hann of length n + 2 with the zero end points dropped.
std::vector<double> StoiWindow(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                static_cast<double>(i + 1) /
                                static_cast<double>(n + 1));
  return w;
}

using Frames = std::vector<std::vector<double>>;

Frames Frame(std::span<const double> x, const std::vector<double>& w) {
  Frames frames;
  for (std::size_t i = 0; i + kStoiFrame < x.size(); i += kStoiHop) {
    std::vector<double> f(kStoiFrame);
    for (std::size_t j = 0; j < kStoiFrame; ++j) f[j] = w[j] * x[i + j];
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<double> OverlapAdd(const Frames& frames) {
  if (frames.empty()) return {};
  std::vector<double> out((frames.size() - 1) * kStoiHop + kStoiFrame, 0.0);
  for (std::size_t k = 0; k < frames.size(); ++k)
    for (std::size_t j = 0; j < kStoiFrame; ++j)
      out[k * kStoiHop + j] += frames[k][j];
  return out;
}

// Band-energy envelopes [band][frame] of the one-third-octave analysis.
std::vector<std::vector<double>> ThirdOctaveEnvelope(
    std::span<const double> x, const std::vector<double>& w) {
  static const auto bands = [] {
    std::vector<std::pair<std::size_t, std::size_t>> b;
    const std::size_t bins = kStoiFft / 2 + 1;
    const auto nearest = [&](double freq) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < bins; ++k) {
        const double f = static_cast<double>(k) * kStoiFs / kStoiFft;
        const double d = (f - freq) * (f - freq);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      return best;
    };
    for (std::size_t i = 0; i < kStoiBands; ++i) {
      const double k = static_cast<double>(i);
      const double lo = kStoiMinFreq * std::pow(2.0, (2.0 * k - 1.0) / 6.0);
      const double hi = kStoiMinFreq * std::pow(2.0, (2.0 * k + 1.0) / 6.0);
      b.emplace_back(nearest(lo), nearest(hi));  // [lo, hi)
    }
    return b;
  }();

  RealFft fft(kStoiFft);
  std::vector<Complex> spec(fft.bins());
  std::vector<double> frame(kStoiFrame);
  std::vector<std::vector<double>> env(kStoiBands);
  for (std::size_t i = 0; i + kStoiFrame < x.size(); i += kStoiHop) {
    for (std::size_t j = 0; j < kStoiFrame; ++j) frame[j] = w[j] * x[i + j];
    fft.Forward(frame, spec);
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      double e = 0.0;
      for (std::size_t k = bands[b].first; k < bands[b].second; ++k)
        e += std::norm(spec[k]);
      env[b].push_back(std::sqrt(e));
    }
  }
  return env;
}

double KaiserWindow(std::size_t n, std::size_t len, double beta) {
  const double r = 2.0 * static_cast<double>(n) / static_cast<double>(len - 1) - 1.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) /
         std::cyl_bessel_i(0.0, beta);
}

}  // namespace

std::vector<double> Resample16kTo10k(std::span<const double> x) {
  constexpr std::size_t up = 5, down = 8;
  constexpr std::size_t half = 10 * down;
  constexpr std::size_t taps = 2 * half + 1;
  static const std::vector<double> h = [] {
    std::vector<double> h(taps);
    const double cutoff = 1.0 / static_cast<double>(down);
    double sum = 0.0;
    for (std::size_t n = 0; n < taps; ++n) {
      const double m = static_cast<double>(n) - static_cast<double>(half);
      const double arg = std::numbers::pi * cutoff * m;
      const double sinc = m == 0.0 ? 1.0 : std::sin(arg) / arg;
      h[n] = cutoff * sinc * KaiserWindow(n, taps, 5.0);
      sum += h[n];
    }
    for (double& v : h) v *= static_cast<double>(up) / sum;
    return h;
  }();
  const std::size_t n_out = (x.size() * up + down - 1) / down;
  std::vector<double> y(n_out, 0.0);
  for (std::size_t k = 0; k < n_out; ++k) {
    // y[k] = sum_n x[n] h[k*down - n*up + half]
    const long long center = static_cast<long long>(k * down + half);
    const long long n_lo = std::max<long long>(
        0, (center - static_cast<long long>(taps) + 1 + up - 1) / up);
    const long long n_hi = std::min<long long>(
        static_cast<long long>(x.size()) - 1, center / up);
    double acc = 0.0;
    for (long long n = n_lo; n <= n_hi; ++n)
      acc += x[static_cast<std::size_t>(n)] *
             h[static_cast<std::size_t>(center - n * static_cast<long long>(up))];
    y[k] = acc;
  }
  return y;
}

double Stoi(std::span<const double> estimate, std::span<const double> reference,
            int fs) {
  if (estimate.size() != reference.size())
    throw Error(ErrorCode::kShapeMismatch, "estimate/reference length differ");
  if (fs != 16000 && fs != kStoiFs)
    throw Error(ErrorCode::kUnsupportedSampleRate,
                "STOI supports 16000 or 10000 Hz");
  if (std::all_of(reference.begin(), reference.end(),
                  [](double v) { return v == 0.0; }))
    throw Error(ErrorCode::kAllSilent, "reference is silent");

  std::vector<double> x(reference.begin(), reference.end());
  std::vector<double> y(estimate.begin(), estimate.end());
  if (fs == 16000) {
    x = Resample16kTo10k(x);
    y = Resample16kTo10k(y);
  }

  // Drop frames more than 40 dB below the loudest reference frame.
  const auto w = StoiWindow(kStoiFrame);
  Frames xf = Frame(x, w), yf = Frame(y, w);
  std::vector<double> level(xf.size());
  for (std::size_t k = 0; k < xf.size(); ++k) {
    double e = 0.0;
    for (double v : xf[k]) e += v * v;
    level[k] = 20.0 * std::log10(std::sqrt(e) + kEps);
  }
  if (level.empty())
    throw Error(ErrorCode::kTooShort, "shorter than one STOI frame");
  const double top = *std::max_element(level.begin(), level.end());
  Frames xk, yk;
  for (std::size_t k = 0; k < xf.size(); ++k) {
    if (top - kStoiDynRange - level[k] < 0.0) {
      xk.push_back(std::move(xf[k]));
      yk.push_back(std::move(yf[k]));
    }
  }
  const auto xs = OverlapAdd(xk);
  const auto ys = OverlapAdd(yk);

  const auto x_env = ThirdOctaveEnvelope(xs, w);
  const auto y_env = ThirdOctaveEnvelope(ys, w);
  const std::size_t frames = x_env[0].size();
  if (frames < kStoiSegment)
    throw Error(ErrorCode::kTooShort,
                "fewer than 30 active frames (384 ms) for STOI");

  const double clip = std::pow(10.0, -kStoiBeta / 20.0);
  double total = 0.0;
  std::size_t segments = 0;
  std::array<double, kStoiSegment> xv{}, yv{};
  for (std::size_t m = kStoiSegment; m <= frames; ++m, ++segments) {
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      double xn = 0.0, yn = 0.0;
      for (std::size_t j = 0; j < kStoiSegment; ++j) {
        xv[j] = x_env[b][m - kStoiSegment + j];
        yv[j] = y_env[b][m - kStoiSegment + j];
        xn += xv[j] * xv[j];
        yn += yv[j] * yv[j];
      }
      const double scale = std::sqrt(xn) / (std::sqrt(yn) + kEps);
      double xmean = 0.0, ymean = 0.0;
      for (std::size_t j = 0; j < kStoiSegment; ++j) {
        yv[j] = std::min(yv[j] * scale, xv[j] * (1.0 + clip));
        xmean += xv[j];
        ymean += yv[j];
      }
      xmean /= kStoiSegment;
      ymean /= kStoiSegment;
      double xx = 0.0, yy = 0.0, xy = 0.0;
      for (std::size_t j = 0; j < kStoiSegment; ++j) {
        const double a = xv[j] - xmean, c = yv[j] - ymean;
        xx += a * a;
        yy += c * c;
        xy += a * c;
      }
      total += xy / ((std::sqrt(xx) + kEps) * (std::sqrt(yy) + kEps));
    }
  }
  const double d = total / static_cast<double>(segments * kStoiBands);
  return std::clamp(d, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

double SegSnr(std::span<const double> estimate,
              std::span<const double> reference, std::size_t frame,
              double min_db, double max_db) {
  if (estimate.size() != reference.size())
    throw Error(ErrorCode::kShapeMismatch, "estimate/reference length differ");
  if (frame == 0) throw Error(ErrorCode::kInvalidArgument, "frame size 0");
  if (std::all_of(reference.begin(), reference.end(),
                  [](double v) { return v == 0.0; }))
    throw Error(ErrorCode::kZeroReference, "reference is silent");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < reference.size(); start += frame) {
    const std::size_t end = std::min(reference.size(), start + frame);
    double signal = 0.0, noise = 0.0;
    for (std::size_t t = start; t < end; ++t) {
      signal += reference[t] * reference[t];
      const double e = reference[t] - estimate[t];
      noise += e * e;
    }
    double snr;
    if (noise == 0.0)
      snr = max_db;
    else if (signal == 0.0)
      snr = min_db;
    else
      snr = std::clamp(10.0 * std::log10(signal / noise), min_db, max_db);
    sum += snr;
    ++count;
  }
  return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// PESQ adapter

std::optional<double> ParsePesqOutput(const std::string& output) {
  static const std::regex number(R"([-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)");
  std::optional<double> last;
  const auto lqo = output.rfind("MOS-LQO");
  std::string tail = output;
  if (lqo != std::string::npos) {
    const auto eq = output.find('=', lqo);
    if (eq != std::string::npos) tail = output.substr(eq + 1);
    std::smatch m;
    if (std::regex_search(tail, m, number)) return std::stod(m.str());
  }
  for (auto it = std::sregex_iterator(output.begin(), output.end(), number);
       it != std::sregex_iterator(); ++it)
    last = std::stod(it->str());
  return last;
}

namespace {

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

}  // namespace

std::optional<double> PesqExternal(
    const std::filesystem::path& estimate_path,
    const std::filesystem::path& reference_path,
    const std::optional<std::filesystem::path>& tool) {
  if (!tool || tool->empty()) return std::nullopt;
  if (::access(tool->c_str(), X_OK) != 0) {
    std::cerr << "warning: " << ErrorCodeName(ErrorCode::kToolMissing)
              << ": PESQ tool " << tool->string()
              << " is not executable; PESQ reported as absent\n";
    return std::nullopt;
  }
  const std::string cmd = ShellQuote(tool->string()) + " +16000 +wb " +
                          ShellQuote(reference_path.string()) + " " +
                          ShellQuote(estimate_path.string()) + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr)
    throw Error(ErrorCode::kToolFailure, "cannot start " + tool->string());
  std::string output;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
    output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw Error(ErrorCode::kToolFailure,
                tool->string() + " failed: " + output);
  const auto score = ParsePesqOutput(output);
  if (!score)
    throw Error(ErrorCode::kToolFailure,
                tool->string() + " printed no score: " + output);
  return score;
}

std::optional<double> PesqExternal(const std::filesystem::path& estimate_path,
                                   const std::filesystem::path& reference_path) {
  const char* env = std::getenv(kPesqEnvVar);
  if (env == nullptr || *env == '\0') return std::nullopt;
  return PesqExternal(estimate_path, reference_path,
                      std::filesystem::path(env));
}

// ---------------------------------------------------------------------------
// Aggregation and reporting

namespace {

int DomainRank(const std::string& domain) {
  return domain == "microphone" ? 0 : domain == "binaural" ? 1 : 2;
}

// Sort key: domain, Noisy first, condition name.
auto GroupKey(const std::string& condition, const std::string& domain) {
  return std::make_tuple(DomainRank(domain), domain, condition != "Noisy",
                         condition);
}

struct Accumulator {
  std::size_t count = 0;
  double si_sdr = 0.0, stoi = 0.0, seg_snr = 0.0, pesq = 0.0;
  std::size_t pesq_count = 0;

  void Add(const MetricsRow& r) {
    ++count;
    si_sdr += r.si_sdr;
    stoi += r.stoi;
    seg_snr += r.seg_snr;
    if (r.pesq) {
      pesq += *r.pesq;
      ++pesq_count;
    }
  }

  AggregateEntry Entry(const std::string& condition, const std::string& domain,
                       std::optional<double> bucket) const {
    const double n = static_cast<double>(count);
    AggregateEntry e{condition, domain, bucket, count,
                     si_sdr / n, stoi / n, seg_snr / n, std::nullopt};
    if (pesq_count > 0) e.pesq = pesq / static_cast<double>(pesq_count);
    return e;
  }
};

std::string FormatNumber(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::kMalformedFile, "unterminated CSV quote");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

constexpr std::array<const char*, 9> kCsvHeader = {
    "scene_id", "condition", "domain", "snr_bucket", "channels",
    "si_sdr",   "stoi",      "pesq",   "seg_snr"};

}  // namespace

std::vector<AggregateEntry> Aggregate(std::span<const MetricsRow> rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmpty, "no metrics rows");
  // Summation order is fixed by sorting, so the means are bit-identical for
  // any permutation of |rows|.
  std::vector<const MetricsRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return std::tie(a->scene_id, a->condition, a->domain, a->snr_bucket) <
           std::tie(b->scene_id, b->condition, b->domain, b->snr_bucket);
  });

  using Group = decltype(GroupKey("", ""));
  std::map<Group, std::map<double, Accumulator>> buckets;
  std::map<Group, Accumulator> overall;
  for (const auto* r : sorted) {
    const auto key = GroupKey(r->condition, r->domain);
    buckets[key][r->snr_bucket].Add(*r);
    overall[key].Add(*r);
  }
  std::vector<AggregateEntry> out;
  for (const auto& [key, per_bucket] : buckets) {
    const auto& domain = std::get<1>(key);
    const auto& condition = std::get<3>(key);
    for (const auto& [bucket, acc] : per_bucket)
      out.push_back(acc.Entry(condition, domain, bucket));
    out.push_back(overall.at(key).Entry(condition, domain, std::nullopt));
  }
  return out;
}

std::string MetricsToCsv(std::span<const MetricsRow> rows) {
  std::string out;
  for (std::size_t i = 0; i < kCsvHeader.size(); ++i)
    out += std::string(i ? "," : "") + kCsvHeader[i];
  out += "\r\n";
  for (const auto& r : rows) {
    out += CsvField(r.scene_id) + "," + CsvField(r.condition) + "," +
           CsvField(r.domain) + "," + FormatNumber(r.snr_bucket, 1) + "," +
           std::to_string(r.channels) + "," + FormatNumber(r.si_sdr) + "," +
           FormatNumber(r.stoi) + "," +
           (r.pesq ? FormatNumber(*r.pesq) : std::string()) + "," +
           FormatNumber(r.seg_snr) + "\r\n";
  }
  return out;
}

std::vector<MetricsRow> MetricsFromCsv(const std::string& text) {
  const auto records = ParseCsv(text);
  if (records.empty() ||
      records[0] != std::vector<std::string>(kCsvHeader.begin(),
                                             kCsvHeader.end()))
    throw Error(ErrorCode::kMalformedFile, "unexpected metrics CSV header");
  std::vector<MetricsRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != kCsvHeader.size())
      throw Error(ErrorCode::kMalformedFile,
                  "metrics CSV line " + std::to_string(i + 1) +
                      " has the wrong number of fields");
    try {
      MetricsRow r;
      r.scene_id = f[0];
      r.condition = f[1];
      r.domain = f[2];
      r.snr_bucket = std::stod(f[3]);
      r.channels = std::stoul(f[4]);
      r.si_sdr = std::stod(f[5]);
      r.stoi = std::stod(f[6]);
      if (!f[7].empty()) r.pesq = std::stod(f[7]);
      r.seg_snr = std::stod(f[8]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kMalformedFile,
                  "metrics CSV line " + std::to_string(i + 1) +
                      " has a non-numeric field");
    }
  }
  return rows;
}

std::string RenderReport(std::span<const AggregateEntry> table,
                         const std::string& metadata) {
  std::ostringstream md;
  md << "# Speech enhancement results\n\n";
  if (!metadata.empty()) md << metadata << "\n\n";
  md << "Scene scores are averaged over microphones (microphone domain) or "
        "ears (binaural domain), then over scenes.\n\n";

  std::vector<std::string> domains;
  for (const auto& e : table)
    if (std::find(domains.begin(), domains.end(), e.domain) == domains.end())
      domains.push_back(e.domain);

  for (const auto& domain : domains) {
    std::vector<double> buckets;
    std::vector<std::string> conditions;
    for (const auto& e : table) {
      if (e.domain != domain) continue;
      if (e.snr_bucket &&
          std::find(buckets.begin(), buckets.end(), *e.snr_bucket) ==
              buckets.end())
        buckets.push_back(*e.snr_bucket);
      if (std::find(conditions.begin(), conditions.end(), e.condition) ==
          conditions.end())
        conditions.push_back(e.condition);
    }
    std::sort(buckets.begin(), buckets.end());

    md << "## " << (domain == "microphone" ? "Microphone signals"
                    : domain == "binaural" ? "Binaural signals"
                                           : domain)
       << "\n\n| Model |";
    for (double b : buckets)
      md << ' ' << FormatNumber(b, 0) << " dB SI-SDR | STOI | PESQ |";
    md << " Overall SI-SDR | STOI | PESQ |\n|---|";
    for (std::size_t i = 0; i <= buckets.size(); ++i) md << "---:|---:|---:|";
    md << '\n';

    for (const auto& condition : conditions) {
      md << "| " << condition << " |";
      const auto cell = [&](std::optional<double> bucket) {
        for (const auto& e : table) {
          if (e.domain == domain && e.condition == condition &&
              e.snr_bucket == bucket) {
            md << ' ' << FormatNumber(e.si_sdr, 2) << " | "
               << FormatNumber(e.stoi, 2) << " | "
               << (e.pesq ? FormatNumber(*e.pesq, 2) : std::string("n/a"))
               << " |";
            return;
          }
        }
        md << " - | - | - |";
      };
      for (double b : buckets) cell(b);
      cell(std::nullopt);
      md << '\n';
    }
    md << '\n';
  }
  return md.str();
}

}  // namespace mave
