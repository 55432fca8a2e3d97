#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2g {

/// Time-aligned price and renewable-power series for one episode.
struct EpisodeInstance {
  std::string name;
  std::vector<double> prices;           // C$/MWh
  std::vector<double> renewable_power;  // MW
  double dt = 1.0;                      // h
  std::int64_t start_epoch_seconds = 0;  // UTC timestamp of step 0

  std::size_t size() const { return prices.size(); }
  std::int64_t timestamp(std::size_t t) const {
    return start_epoch_seconds + static_cast<std::int64_t>(t * dt * 3600.0);
  }

  /// Throws DataError if the series are inconsistent.
  void validate() const;

  friend bool operator==(const EpisodeInstance&, const EpisodeInstance&) = default;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Knobs of the synthetic generators.
struct GeneratorConfig {
  double median_price = 84.0;       // C$/MWh
  double diurnal_amplitude = 0.45;  // fraction of the median
  double price_noise = 0.15;        // bounded uniform noise, fraction of the median
  double spike_factor = 6.0;        // spike floor as a multiple of the base median
  double spike_spread = 0.5;        // extra random spike height, multiple of the factor
  double wind_capacity = 31.5;      // MW
  double wind_mean = 18.0;          // MW
  double wind_persistence = 0.8;    // AR(1) coefficient
  double wind_noise = 5.0;          // MW
  std::int64_t start_epoch_seconds = 1640995200;  // 2022-01-01T00:00:00Z

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

/// 24 hourly steps with a price spike on the final two steps.
EpisodeInstance generate_cs1(std::uint64_t seed, const GeneratorConfig& config = {});

/// 168 hourly steps with two spike clusters in the final third, at least a day apart.
EpisodeInstance generate_cs2(std::uint64_t seed, const GeneratorConfig& config = {});

/// Reads `timestamp,price_cad_per_mwh,wind_power_mw` with hourly, gap-free timestamps.
EpisodeInstance load_csv(const std::filesystem::path& path);
EpisodeInstance parse_csv(std::istream& in, const std::string& name);

void write_csv(const EpisodeInstance& instance, std::ostream& out);
void write_csv(const EpisodeInstance& instance, const std::filesystem::path& path);

/// ISO-8601 UTC timestamp, `YYYY-MM-DDTHH:MM:SS` (a space separator and missing seconds are accepted).
std::int64_t parse_timestamp(const std::string& text);
std::string format_timestamp(std::int64_t epoch_seconds);

struct InstanceSummary {
  double mean_price = 0.0;
  double median_price = 0.0;
  double std_price = 0.0;  // population standard deviation
  double capacity_factor = 0.0;
};

InstanceSummary summarize(const EpisodeInstance& instance, double wind_capacity = 31.5);

double median(std::vector<double> values);

}  // namespace p2g
