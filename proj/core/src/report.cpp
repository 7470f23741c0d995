#include "thpsim/report.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace thpsim {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

ordered estimate_json(const Estimate& e) { return {{"value", e.value}, {"lo", e.lo}, {"hi", e.hi}}; }

Estimate estimate_from(const json& j) {
  return {j.at("value").get<double>(), j.at("lo").get<double>(), j.at("hi").get<double>()};
}

ordered sim_json(const SimResult& r) {
  ordered j;
  j["qber"] = estimate_json(r.qber);
  j["eve_info"] = r.eve_info ? estimate_json(*r.eve_info) : ordered(nullptr);
  j["detection_rate"] = estimate_json(r.detection_rate);
  j["sifted_count"] = r.sifted_count;
  j["frames"] = r.frames;
  const FrameTally& t = r.counts;
  j["counts"] = {{"slots", t.slots},
                 {"gated", t.gated},
                 {"clicks", t.clicks},
                 {"double_clicks", t.double_clicks},
                 {"sifted", t.sifted},
                 {"errors", t.errors},
                 {"known", t.known},
                 {"signal_clicks", t.signal_clicks},
                 {"dark_clicks", t.dark_clicks},
                 {"afterpulse_clicks", t.afterpulse_clicks}};
  return j;
}

SimResult sim_from(const json& j) {
  SimResult r;
  r.qber = estimate_from(j.at("qber"));
  if (!j.at("eve_info").is_null()) r.eve_info = estimate_from(j.at("eve_info"));
  r.detection_rate = estimate_from(j.at("detection_rate"));
  r.sifted_count = j.at("sifted_count").get<std::uint64_t>();
  r.frames = j.at("frames").get<std::uint64_t>();
  const json& c = j.at("counts");
  FrameTally& t = r.counts;
  t.slots = c.at("slots").get<std::uint64_t>();
  t.gated = c.at("gated").get<std::uint64_t>();
  t.clicks = c.at("clicks").get<std::uint64_t>();
  t.double_clicks = c.at("double_clicks").get<std::uint64_t>();
  t.sifted = c.at("sifted").get<std::uint64_t>();
  t.errors = c.at("errors").get<std::uint64_t>();
  t.known = c.at("known").get<std::uint64_t>();
  t.signal_clicks = c.at("signal_clicks").get<std::uint64_t>();
  t.dark_clicks = c.at("dark_clicks").get<std::uint64_t>();
  t.afterpulse_clicks = c.at("afterpulse_clicks").get<std::uint64_t>();
  return r;
}

ordered combo_json(const AttackCombination& c) {
  return {{"n_block", c.n_block},         {"n_lowloss", c.n_lowloss},
          {"t_ll", c.t_ll},               {"n_thp_slots", c.n_thp_slots},
          {"n_bursts", c.n_bursts},       {"burst_len", c.burst_len},
          {"thp_photons", c.thp_photons}, {"readout_theta", c.readout_theta},
          {"readout_mu", c.readout_mu},   {"layout", to_string(c.layout)}};
}

AttackCombination combo_from(const json& j) {
  AttackCombination c;
  c.n_block = j.at("n_block").get<int>();
  c.n_lowloss = j.at("n_lowloss").get<int>();
  c.t_ll = j.at("t_ll").get<double>();
  c.n_thp_slots = j.at("n_thp_slots").get<int>();
  c.n_bursts = j.at("n_bursts").get<int>();
  c.burst_len = j.at("burst_len").get<int>();
  c.thp_photons = j.at("thp_photons").get<double>();
  c.readout_theta = j.at("readout_theta").get<double>();
  c.readout_mu = j.at("readout_mu").get<double>();
  c.layout = layout_from_string(j.at("layout").get<std::string>());
  return c;
}

ordered report_json(const BreachReport& r) {
  ordered j;
  j["combination"] = combo_json(r.combination);
  j["result"] = sim_json(r.result);
  j["i_est"] = r.i_est;
  j["q_abort"] = r.q_abort;
  j["readout_error"] = r.readout_error;
  j["baseline_rate"] = r.baseline_rate;
  j["rate_deviation"] = r.rate_deviation;
  j["breach"] = r.breach;
  return j;
}

BreachReport report_from(const json& j) {
  BreachReport r;
  r.combination = combo_from(j.at("combination"));
  r.result = sim_from(j.at("result"));
  r.i_est = j.at("i_est").get<double>();
  r.q_abort = j.at("q_abort").get<double>();
  r.readout_error = j.at("readout_error").get<double>();
  r.baseline_rate = j.at("baseline_rate").get<double>();
  r.rate_deviation = j.at("rate_deviation").get<double>();
  r.breach = j.at("breach").get<bool>();
  return r;
}

template <typename F>
auto parse_with(const std::string& text, F f) {
  try {
    return f(json::parse(text));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed result JSON: ") + e.what());
  }
}

}  // namespace

std::string format6(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

std::string sim_result_to_json(const SimResult& r) { return sim_json(r).dump(2) + "\n"; }
SimResult sim_result_from_json(const std::string& text) { return parse_with(text, sim_from); }

std::string combination_to_json(const AttackCombination& c) { return combo_json(c).dump(2) + "\n"; }
AttackCombination combination_from_json(const std::string& text) {
  return parse_with(text, combo_from);
}

std::string report_to_json(const BreachReport& r) { return report_json(r).dump(2) + "\n"; }
BreachReport report_from_json(const std::string& text) { return parse_with(text, report_from); }

std::string reports_to_json(std::span<const BreachReport> reports) {
  ordered arr = ordered::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

std::vector<BreachReport> reports_from_json(const std::string& text) {
  return parse_with(text, [](const json& j) {
    std::vector<BreachReport> out;
    for (const auto& e : j) out.push_back(report_from(e));
    return out;
  });
}

std::string report_csv_header() {
  return "rank,n_block,n_lowloss,t_ll,n_thp_slots,n_bursts,burst_len,thp_photons,readout_theta,"
         "readout_mu,layout,qber,qber_lo,qber_hi,i_act,i_act_lo,i_act_hi,detection_rate,"
         "sifted,frames,i_est,q_abort,readout_error,rate_deviation,breach";
}

std::string report_csv_row(const BreachReport& r) {
  const auto& c = r.combination;
  const auto& s = r.result;
  std::ostringstream ss;
  ss << c.n_block << ',' << c.n_lowloss << ',' << format6(c.t_ll) << ',' << c.n_thp_slots << ','
     << c.n_bursts << ',' << c.burst_len << ',' << format6(c.thp_photons) << ','
     << format6(c.readout_theta) << ',' << format6(c.readout_mu) << ',' << to_string(c.layout)
     << ',' << format6(s.qber.value) << ',' << format6(s.qber.lo) << ',' << format6(s.qber.hi)
     << ',';
  if (s.eve_info) {
    ss << format6(s.eve_info->value) << ',' << format6(s.eve_info->lo) << ','
       << format6(s.eve_info->hi);
  } else {
    ss << ",,";
  }
  ss << ',' << format6(s.detection_rate.value) << ',' << s.sifted_count << ',' << s.frames << ','
     << format6(r.i_est) << ',' << format6(r.q_abort) << ',' << format6(r.readout_error) << ','
     << format6(r.rate_deviation) << ',' << (r.breach ? 1 : 0);
  return ss.str();
}

void write_reports_csv(std::ostream& out, std::span<const BreachReport> reports) {
  out << report_csv_header() << '\n';
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << (i + 1) << ',' << report_csv_row(reports[i]) << '\n';
  }
}

std::vector<BreachReport> read_reports_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != report_csv_header()) {
    throw std::runtime_error("report CSV: unexpected header");
  }
  std::vector<BreachReport> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 25) {
      throw std::runtime_error("report CSV line " + std::to_string(lineno) + ": expected 25 fields");
    }
    try {
      BreachReport r;
      auto& c = r.combination;
      c.n_block = std::stoi(f[1]);
      c.n_lowloss = std::stoi(f[2]);
      c.t_ll = std::stod(f[3]);
      c.n_thp_slots = std::stoi(f[4]);
      c.n_bursts = std::stoi(f[5]);
      c.burst_len = std::stoi(f[6]);
      c.thp_photons = std::stod(f[7]);
      c.readout_theta = std::stod(f[8]);
      c.readout_mu = std::stod(f[9]);
      c.layout = layout_from_string(f[10]);
      r.result.qber = {std::stod(f[11]), std::stod(f[12]), std::stod(f[13])};
      if (!f[14].empty()) r.result.eve_info = Estimate{std::stod(f[14]), std::stod(f[15]), std::stod(f[16])};
      r.result.detection_rate.value = std::stod(f[17]);
      r.result.sifted_count = std::stoull(f[18]);
      r.result.frames = std::stoull(f[19]);
      r.i_est = std::stod(f[20]);
      r.q_abort = std::stod(f[21]);
      r.readout_error = std::stod(f[22]);
      r.rate_deviation = std::stod(f[23]);
      r.breach = f[24] == "1";
      out.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("report CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace thpsim
