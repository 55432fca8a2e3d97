#include "p2g/data.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "p2g/io.hpp"

namespace p2g {

void EpisodeInstance::validate() const {
  if (prices.empty()) throw DataError(name + ": empty instance");
  if (prices.size() != renewable_power.size())
    throw DataError(name + ": price and renewable series differ in length");
  if (!(dt > 0)) throw DataError(name + ": dt must be positive");
  for (std::size_t t = 0; t < prices.size(); ++t) {
    if (!std::isfinite(prices[t])) throw DataError(name + ": non-finite price at step " + std::to_string(t));
    if (!std::isfinite(renewable_power[t]) || renewable_power[t] < 0)
      throw DataError(name + ": invalid renewable power at step " + std::to_string(t));
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

std::vector<double> diurnal_prices(std::size_t steps, const GeneratorConfig& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> noise(-c.price_noise, c.price_noise);
  std::vector<double> prices(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const double hour = static_cast<double>(t % 24);
    // trough around 02:00, peak around 14:00
    const double shape = std::sin(2.0 * std::numbers::pi * (hour - 8.0) / 24.0);
    prices[t] = std::max(1.0, c.median_price * (1.0 + c.diurnal_amplitude * shape + noise(rng)));
  }
  return prices;
}

std::vector<double> wind_series(std::size_t steps, const GeneratorConfig& c, std::mt19937_64& rng) {
  std::normal_distribution<double> eps(0.0, 1.0);
  const double stationary = c.wind_noise / std::sqrt(std::max(1e-12, 1.0 - c.wind_persistence * c.wind_persistence));
  std::vector<double> wind(steps);
  double w = c.wind_mean + stationary * eps(rng);
  for (std::size_t t = 0; t < steps; ++t) {
    w = std::clamp(w, 0.0, c.wind_capacity);
    wind[t] = w;
    w = c.wind_mean + c.wind_persistence * (w - c.wind_mean) + c.wind_noise * eps(rng);
  }
  return wind;
}

void add_spikes(std::vector<double>& prices, std::size_t first, std::size_t count, double base_median,
                const GeneratorConfig& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t t = first; t < first + count; ++t)
    prices[t] = base_median * c.spike_factor * (1.0 + c.spike_spread * u(rng));
}

}  // namespace

EpisodeInstance generate_cs1(std::uint64_t seed, const GeneratorConfig& config) {
  constexpr std::size_t kSteps = 24;
  constexpr std::size_t kSpikeSteps = 2;
  std::mt19937_64 rng(seed);
  EpisodeInstance inst;
  inst.name = "cs1-seed" + std::to_string(seed);
  inst.start_epoch_seconds = config.start_epoch_seconds;
  inst.prices = diurnal_prices(kSteps, config, rng);
  inst.renewable_power = wind_series(kSteps, config, rng);
  const double base = median({inst.prices.begin(), inst.prices.end() - kSpikeSteps});
  add_spikes(inst.prices, kSteps - kSpikeSteps, kSpikeSteps, base, config, rng);
  return inst;
}

EpisodeInstance generate_cs2(std::uint64_t seed, const GeneratorConfig& config) {
  constexpr std::size_t kSteps = 168;
  std::mt19937_64 rng(seed);
  EpisodeInstance inst;
  inst.name = "cs2-seed" + std::to_string(seed);
  inst.start_epoch_seconds = config.start_epoch_seconds;
  inst.prices = diurnal_prices(kSteps, config, rng);
  inst.renewable_power = wind_series(kSteps, config, rng);
  const double base = median(inst.prices);

  // Cluster lengths 3..5 h, first cluster inside the final third, second at least 24 h later.
  std::uniform_int_distribution<std::size_t> length(3, 5);
  const std::size_t len_a = length(rng);
  const std::size_t len_b = length(rng);
  const std::size_t lo_a = 2 * kSteps / 3;
  std::uniform_int_distribution<std::size_t> start_a(lo_a, lo_a + 16);
  const std::size_t a = start_a(rng);
  std::uniform_int_distribution<std::size_t> start_b(a + len_a + 24, kSteps - len_b);
  const std::size_t b = start_b(rng);
  add_spikes(inst.prices, a, len_a, base, config, rng);
  add_spikes(inst.prices, b, len_b, base, config, rng);
  return inst;
}

std::int64_t parse_timestamp(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  const int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d%n:%2d%n", &y, &mo, &d, &sep, &h, &mi,
                            &consumed, &s, &consumed);
  if (n < 6 || (sep != 'T' && sep != ' '))
    throw std::invalid_argument("bad timestamp '" + text + "'");
  std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z")) throw std::invalid_argument("bad timestamp '" + text + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0)
    throw std::invalid_argument("bad timestamp '" + text + "'");
  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  return tp.time_since_epoch().count();
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch_seconds}};
  const auto day_point = floor<days>(tp);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{tp - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

EpisodeInstance parse_csv(std::istream& in, const std::string& name) {
  static const char* kColumns[] = {"timestamp", "price_cad_per_mwh", "wind_power_mw"};
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty file, header required");
  const auto header = split_csv_line(line);
  std::size_t col[3];
  for (int k = 0; k < 3; ++k) {
    const auto it = std::find(header.begin(), header.end(), kColumns[k]);
    if (it == header.end()) throw DataError(name + ": missing column '" + kColumns[k] + "'");
    col[k] = static_cast<std::size_t>(it - header.begin());
  }

  EpisodeInstance inst;
  inst.name = name;
  inst.dt = 1.0;
  std::int64_t previous = 0;
  std::size_t row = 1;  // 1-based data row, header excluded
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    const std::string where = name + ": row " + std::to_string(row);
    if (fields.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    std::int64_t ts = 0;
    double price = 0.0, wind = 0.0;
    try {
      ts = parse_timestamp(fields[col[0]]);
      price = parse_double(fields[col[1]]);
      wind = parse_double(fields[col[2]]);
    } catch (const std::invalid_argument& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!std::isfinite(price)) throw DataError(where + ": non-finite price");
    if (!std::isfinite(wind) || wind < 0) throw DataError(where + ": wind power must be finite and >= 0");
    if (row == 1) {
      inst.start_epoch_seconds = ts;
    } else if (ts <= previous) {
      throw DataError(where + ": timestamp " + fields[col[0]] + " is not after " + format_timestamp(previous));
    } else if (ts != previous + 3600) {
      throw DataError(where + ": gap between " + format_timestamp(previous) + " and " + fields[col[0]] +
                      " (data must be hourly)");
    }
    previous = ts;
    inst.prices.push_back(price);
    inst.renewable_power.push_back(wind);
    ++row;
  }
  if (inst.prices.empty()) throw DataError(name + ": no data rows");
  return inst;
}

EpisodeInstance load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, path.stem().string());
}

void write_csv(const EpisodeInstance& instance, std::ostream& out) {
  out << "timestamp,price_cad_per_mwh,wind_power_mw\n";
  for (std::size_t t = 0; t < instance.size(); ++t)
    out << format_timestamp(instance.timestamp(t)) << ',' << format_double(instance.prices[t]) << ','
        << format_double(instance.renewable_power[t]) << '\n';
}

void write_csv(const EpisodeInstance& instance, const std::filesystem::path& path) {
  std::ostringstream ss;
  write_csv(instance, ss);
  write_file(path, ss.str());
}

InstanceSummary summarize(const EpisodeInstance& instance, double wind_capacity) {
  InstanceSummary s;
  const auto n = static_cast<double>(instance.size());
  if (instance.size() == 0) return s;
  s.mean_price = std::accumulate(instance.prices.begin(), instance.prices.end(), 0.0) / n;
  s.median_price = median(instance.prices);
  double ss = 0.0;
  for (double p : instance.prices) ss += (p - s.mean_price) * (p - s.mean_price);
  s.std_price = std::sqrt(ss / n);
  s.capacity_factor =
      std::accumulate(instance.renewable_power.begin(), instance.renewable_power.end(), 0.0) / (n * wind_capacity);
  return s;
}

}  // namespace p2g
