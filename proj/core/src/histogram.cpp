#include "thpsim/histogram.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace thpsim {

double CountHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

void CountHistogram::validate() const {
  if (!(bin_width_s > 0.0)) throw std::invalid_argument("histogram bin width must be > 0");
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("histogram counts must be finite and >= 0");
    }
  }
  if (trials && !(*trials > 0.0)) throw std::invalid_argument("trials must be > 0");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

CountHistogram read_histogram_csv(std::istream& in) {
  std::vector<double> starts;
  CountHistogram hist;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      // "# trials = N" carries the number of THP injections.
      const auto eq = t.find('=');
      if (eq != std::string::npos && trim(t.substr(1, eq - 1)) == "trials") {
        double n = 0.0;
        if (!parse_double(t.substr(eq + 1), n) || !(n > 0.0)) {
          throw std::runtime_error("line " + std::to_string(lineno) + ": bad trials value");
        }
        hist.trials = n;
      }
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 'bin_start_s,counts'");
    }
    double start = 0.0;
    double count = 0.0;
    const bool ok_start = parse_double(t.substr(0, comma), start);
    const bool ok_count = parse_double(t.substr(comma + 1), count);
    if (!ok_start || !ok_count) {
      if (starts.empty() && hist.counts.empty() && !ok_start) continue;  // header
      throw std::runtime_error("line " + std::to_string(lineno) + ": malformed row '" + t + "'");
    }
    if (count < 0.0 || !std::isfinite(count)) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": negative or non-finite count");
    }
    starts.push_back(start);
    hist.counts.push_back(count);
  }
  if (hist.counts.size() < 2) {
    throw std::runtime_error("histogram needs at least two bins");
  }
  hist.start_s = starts.front();
  hist.bin_width_s = (starts.back() - starts.front()) / static_cast<double>(starts.size() - 1);
  if (!(hist.bin_width_s > 0.0)) {
    throw std::runtime_error("bin starts must increase");
  }
  for (std::size_t i = 1; i < starts.size(); ++i) {
    const double expected = hist.start_s + static_cast<double>(i) * hist.bin_width_s;
    // Slack for starts printed at 6 significant digits.
    if (std::abs(starts[i] - expected) > 1e-3 * hist.bin_width_s) {
      throw std::runtime_error("bin " + std::to_string(i) + ": bins are not evenly spaced");
    }
  }
  return hist;
}

CountHistogram read_histogram_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open histogram file '" + path + "'");
  return read_histogram_csv(in);
}

void write_histogram_csv(std::ostream& out, const CountHistogram& hist) {
  const auto old = out.precision(6);
  if (hist.trials) out << "# trials = " << *hist.trials << '\n';
  out << "bin_start_s,counts\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << hist.bin_start(i) << ',' << hist.counts[i] << '\n';
  }
  out.precision(old);
}

CountHistogram saturation_correct(const CountHistogram& hist) {
  hist.validate();
  if (!hist.trials) {
    throw std::invalid_argument("saturation correction needs the number of trials");
  }
  const double trials = *hist.trials;
  CountHistogram out = hist;
  double seen = 0.0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double remaining = 1.0 - seen / trials;
    if (!(remaining > 0.0)) {
      throw std::invalid_argument("histogram inconsistent: counts before bin " +
                                  std::to_string(i) + " reach the number of trials");
    }
    out.counts[i] = hist.counts[i] / remaining;
    seen += hist.counts[i];
  }
  return out;
}

SplitCounts split_counts(const CountHistogram& hist, std::size_t tail_start) {
  hist.validate();
  const std::size_t n = hist.counts.size();
  if (tail_start >= n || n - tail_start < kMinTailBins) {
    throw std::invalid_argument("tail must hold at least " + std::to_string(kMinTailBins) +
                                " bins");
  }
  const double total = hist.total();
  const double tail_sum =
      std::accumulate(hist.counts.begin() + static_cast<std::ptrdiff_t>(tail_start),
                      hist.counts.end(), 0.0);
  SplitCounts out;
  out.tail_level = tail_sum / static_cast<double>(n - tail_start);
  out.dark = out.tail_level * static_cast<double>(n);
  const double overall_mean = total / static_cast<double>(n);
  if (out.tail_level >= overall_mean) {
    out.no_afterpulse_signal = true;
    out.dark = total;
    out.afterpulse = 0.0;
    return out;
  }
  out.afterpulse = std::max(0.0, total - out.dark);
  return out;
}

CountHistogram expand_to_gates(const CountHistogram& hist, double gate_period_s) {
  hist.validate();
  if (!(gate_period_s > 0.0)) throw std::invalid_argument("gate period must be > 0");
  const double ratio = hist.bin_width_s / gate_period_s;
  const auto per_bin = static_cast<std::size_t>(std::llround(ratio));
  if (per_bin == 0 || std::abs(ratio - static_cast<double>(per_bin)) > 1e-6 * ratio) {
    throw std::invalid_argument("bin width is not a whole number of gate periods");
  }
  CountHistogram out;
  out.bin_width_s = gate_period_s;
  out.start_s = hist.start_s;
  out.trials = hist.trials;
  out.counts.reserve(hist.counts.size() * per_bin);
  for (double c : hist.counts) {
    for (std::size_t k = 0; k < per_bin; ++k) out.counts.push_back(c / static_cast<double>(per_bin));
  }
  return out;
}

std::vector<double> normalize_for_display(const CountHistogram& hist, double floor_level) {
  if (hist.counts.empty()) return {};
  const double peak = *std::max_element(hist.counts.begin(), hist.counts.end());
  const double span = peak - floor_level;
  std::vector<double> out(hist.counts.size(), 0.0);
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out[i] = (hist.counts[i] - floor_level) / span;
  }
  return out;
}

}  // namespace thpsim
