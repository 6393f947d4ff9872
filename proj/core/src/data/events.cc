#include "stop/data/events.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "stop/error.h"

namespace stop {

void EventStream::validate() const {
  if (height == 0 || width == 0) {
    throw DataError("event stream: sensor size must be positive");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (i > 0 && e.timestamp < events[i - 1].timestamp) {
      throw DataError("event " + std::to_string(i) +
                      ": timestamp decreases");
    }
    if (e.x >= width || e.y >= height) {
      throw DataError("event " + std::to_string(i) + ": (" +
                      std::to_string(e.x) + ", " + std::to_string(e.y) +
                      ") outside the " + std::to_string(height) + "x" +
                      std::to_string(width) + " sensor");
    }
    if (e.polarity != 0 && e.polarity != 1) {
      throw DataError("event " + std::to_string(i) + ": polarity " +
                      std::to_string(e.polarity));
    }
  }
}

EventStream read_events(std::istream& in) {
  EventStream stream;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' ||
        line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream fields(line);
    if (!header) {
      long long h = 0, w = 0;
      if (!(fields >> h >> w) || h <= 0 || w <= 0) {
        throw DataError("line " + std::to_string(line_no) +
                        ": expected header \"H W\"");
      }
      stream.height = static_cast<std::size_t>(h);
      stream.width = static_cast<std::size_t>(w);
      header = true;
      continue;
    }
    long long t = 0, x = 0, y = 0, p = 0;
    if (!(fields >> t >> x >> y >> p) || x < 0 || y < 0) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected \"t x y p\"");
    }
    stream.events.push_back({t, static_cast<std::size_t>(x),
                             static_cast<std::size_t>(y),
                             static_cast<int>(p)});
  }
  if (!header) throw DataError("event file: missing header");
  stream.validate();
  return stream;
}

EventStream load_events(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_events(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_events(std::ostream& out, const EventStream& stream) {
  out << stream.height << ' ' << stream.width << '\n';
  for (const Event& e : stream.events) {
    out << e.timestamp << ' ' << e.x << ' ' << e.y << ' ' << e.polarity
        << '\n';
  }
}

SlicedEvents slice_events(const EventStream& stream, int time_steps,
                          bool normalize) {
  stream.validate();
  if (time_steps < 1) throw DataError("slice_events: T must be at least 1");
  const auto slices = static_cast<std::size_t>(time_steps);
  const std::size_t n = stream.events.size();
  if (n < slices) {
    throw DataError("slice_events: " + std::to_string(n) +
                    " events cannot fill " + std::to_string(slices) +
                    " slices");
  }
  const std::size_t per_slice = n / slices;
  const Shape shape{2, stream.height, stream.width};

  SlicedEvents out;
  out.counts.assign(slices, Tensor(shape));
  for (std::size_t i = 0; i < n; ++i) {
    const Event& e = stream.events[i];
    const std::size_t slice = std::min(i / per_slice, slices - 1);
    out.counts[slice].at(static_cast<std::size_t>(e.polarity), e.y, e.x) +=
        1.0;
  }

  double peak = 0.0;
  for (const Tensor& c : out.counts) {
    for (double v : c.values()) peak = std::max(peak, v);
  }
  out.frames = out.counts;
  if (normalize && peak > 0.0) {
    for (Tensor& f : out.frames) {
      for (double& v : f.values()) v /= peak;
    }
  }
  return out;
}

}  // namespace stop
