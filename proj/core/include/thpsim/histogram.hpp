#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace thpsim {

// Click-time histogram following a THP. Counts are doubles because the
// saturation correction produces non-integer values.
struct CountHistogram {
  double bin_width_s = 0.0;
  double start_s = 0.0;
  std::vector<double> counts;
  std::optional<double> trials;  // number of THP injections

  double total() const;
  double bin_start(std::size_t i) const { return start_s + static_cast<double>(i) * bin_width_s; }
  double bin_centre(std::size_t i) const { return bin_start(i) + 0.5 * bin_width_s; }

  void validate() const;
};

/// Reads "bin_start_s,counts" rows. A header line is optional, '#' starts a
/// comment, and "# trials = N" sets the injection count. Throws
/// std::runtime_error naming the offending line.
CountHistogram read_histogram_csv(std::istream& in);
CountHistogram read_histogram_csv_file(const std::string& path);
/// Values at 6 significant digits.
void write_histogram_csv(std::ostream& out, const CountHistogram& hist);

/// Undoes first-click censoring: a trial that clicked in an earlier bin
/// cannot click again, so bin i only saw trials - sum(raw[j<i]) chances.
CountHistogram saturation_correct(const CountHistogram& hist);

struct SplitCounts {
  double afterpulse = 0.0;  // ApC
  double dark = 0.0;        // DC
  double tail_level = 0.0;  // mean counts per bin in the tail
  bool no_afterpulse_signal = false;
};

/// Dark counts are the tail level times the number of bins; everything else
/// is attributed to afterpulsing. The tail starts at tail_start and must be
/// at least kMinTailBins long.
SplitCounts split_counts(const CountHistogram& hist, std::size_t tail_start);

inline constexpr std::size_t kMinTailBins = 10;

/// Expands bins that span several gates into per-gate bins, splitting the
/// counts evenly.
CountHistogram expand_to_gates(const CountHistogram& hist, double gate_period_s);

/// Display scaling: the dark floor maps to 0 and the peak to 1, so profiles
/// with different brightness can be overlaid.
std::vector<double> normalize_for_display(const CountHistogram& hist, double floor_level);

}  // namespace thpsim
