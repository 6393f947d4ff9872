#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "stop/numerics/tensor.h"

namespace stop {

struct Event {
  std::int64_t timestamp = 0;  // microseconds
  std::size_t x = 0;           // column
  std::size_t y = 0;           // row
  int polarity = 0;            // 0 or 1

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventStream {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Event> events;

  // Throws DataError unless timestamps are non-decreasing, coordinates lie
  // on the sensor and polarities are 0 or 1.
  void validate() const;
};

// Text format: a header line "H W", then one event per line "t x y p".
// Blank lines and lines starting with '#' are skipped.
EventStream read_events(std::istream& in);
EventStream load_events(const std::filesystem::path& path);
void write_events(std::ostream& out, const EventStream& stream);

struct SlicedEvents {
  std::vector<Tensor> counts;  // raw per-slice histograms, 2 x H x W
  std::vector<Tensor> frames;  // counts / per-sample max, or raw counts
};

// Splits the stream into T runs of floor(n / T) consecutive events, the
// remainder going to the last run, and histograms each run per polarity and
// pixel. Throws DataError for fewer than T events.
SlicedEvents slice_events(const EventStream& stream, int time_steps,
                          bool normalize = true);

}  // namespace stop
