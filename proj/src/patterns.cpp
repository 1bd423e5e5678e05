#include "inferlab/patterns.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "inferlab/genctl.hpp"

namespace inferlab {

// ---------------------------------------------------------- symbol blocks ---

BlockModel fit_block_model(const SymbolSequence& seq,
                           std::size_t block_length) {
  if (block_length == 0) {
    throw std::domain_error("block length must be positive");
  }
  if (seq.symbols.empty()) {
    throw std::domain_error("sequence must be nonempty");
  }
  if (block_length > seq.length()) {
    throw std::domain_error("block length exceeds the sequence length");
  }
  std::size_t blocks = seq.length() / block_length;
  std::map<std::string, std::size_t> counts;
  for (std::size_t b = 0; b < blocks; ++b) {
    counts[seq.symbols.substr(b * block_length, block_length)] += 1;
  }
  BlockModel model;
  model.block_length = block_length;
  for (const auto& [block, count] : counts) {
    model.block_frequencies[block] =
        static_cast<double>(count) / static_cast<double>(blocks);
  }
  return model;
}

SymbolSequence simulate_sequence(const BlockModel& model,
                                 std::size_t min_length, SeedSpec seed) {
  if (model.block_frequencies.empty()) {
    throw std::domain_error("block model has no blocks");
  }
  rng::Engine g = rng::engine_for(seed, 0);
  SymbolSequence out;
  out.symbols.reserve(min_length + model.block_length);
  while (out.symbols.size() < min_length) {
    double u = rng::u01(g);
    double acc = 0.0;
    const std::string* pick = nullptr;
    for (const auto& [block, freq] : model.block_frequencies) {
      acc += freq;
      pick = &block;
      if (u < acc) break;
    }
    out.symbols += *pick;
  }
  return out;
}

SymbolSequence parse_sequence_line(const std::string& line) {
  SymbolSequence seq;
  for (char c : line) {
    if (c == '\n' || c == '\r') break;
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    seq.symbols.push_back(c);
  }
  if (seq.symbols.empty()) {
    throw std::domain_error("sequence line holds no symbols");
  }
  return seq;
}

std::string sequence_line(const SymbolSequence& seq) { return seq.symbols; }

// ---------------------------------------------------------- layered images --

namespace {

Color operator+(const Color& a, const Color& b) {
  return Color{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

Color operator-(const Color& a, const Color& b) {
  return Color{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

struct ColorSums {
  Color sum{0.0, 0.0, 0.0};
  std::size_t n = 0;
  void add(const Color& c) {
    sum = sum + c;
    ++n;
  }
  Color mean() const {
    double d = static_cast<double>(n);
    return Color{sum[0] / d, sum[1] / d, sum[2] / d};
  }
};

std::size_t cells_at(int level) { return std::size_t{1} << (2 * level); }

std::size_t parent_of(std::size_t cell, int level) {
  std::size_t side = std::size_t{1} << level;
  std::size_t ix = cell % side;
  std::size_t iy = cell / side;
  return (iy / 2) * (side / 2) + ix / 2;
}

void check_resolution(int R) {
  if (R < 1 || R > 3) {
    throw std::domain_error("resolution must be 1, 2, or 3");
  }
}

Color draw_layer(const LayerLaw& law, const std::vector<Color>& pool,
                 std::size_t own_cell, bool pixel_layer, rng::Engine& g) {
  if (std::holds_alternative<EmpiricalResample>(law.v)) {
    if (pool.empty()) {
      throw std::domain_error("layer has no fitted increments to resample");
    }
    return pool[g() % pool.size()];
  }
  if (std::holds_alternative<CellPointMass>(law.v)) {
    if (pixel_layer) return Color{0.0, 0.0, 0.0};
    return pool[own_cell];
  }
  const auto& noise = std::get<NoiseSpec>(law.v);
  return Color{sample_real_noise(noise, g), sample_real_noise(noise, g),
               sample_real_noise(noise, g)};
}

}  // namespace

std::size_t cell_index(double x, double y, int level) {
  double side = std::pow(2.0, level);
  auto clamp = [&](double v) {
    auto i = static_cast<long>(v * side);
    i = std::max(0L, std::min(i, static_cast<long>(side) - 1));
    return static_cast<std::size_t>(i);
  };
  return clamp(y) * (std::size_t{1} << level) + clamp(x);
}

LayeredImageModel fit_layers(const std::vector<ImageSample>& samples, int R) {
  check_resolution(R);
  if (samples.empty()) throw std::domain_error("no samples to fit");

  LayeredImageModel model;
  model.resolution = R;
  model.level_means.resize(static_cast<std::size_t>(R));

  for (int level = 0; level < R; ++level) {
    std::vector<ColorSums> sums(cells_at(level));
    for (const auto& s : samples) {
      sums[cell_index(s.x, s.y, level)].add(s.color);
    }
    auto& means = model.level_means[static_cast<std::size_t>(level)];
    means.resize(sums.size());
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (sums[c].n == 0) {
        std::size_t side = std::size_t{1} << level;
        throw std::domain_error(
            "insufficient data resolution: cell (" +
            std::to_string(c % side) + ", " + std::to_string(c / side) +
            ") at level " + std::to_string(level) + " holds no samples");
      }
      means[c] = sums[c].mean();
    }
  }

  model.increments.resize(static_cast<std::size_t>(R - 1));
  for (int level = 1; level < R; ++level) {
    const auto& fine = model.level_means[static_cast<std::size_t>(level)];
    const auto& coarse = model.level_means[static_cast<std::size_t>(level - 1)];
    auto& inc = model.increments[static_cast<std::size_t>(level - 1)];
    inc.resize(fine.size());
    for (std::size_t c = 0; c < fine.size(); ++c) {
      inc[c] = fine[c] - coarse[parent_of(c, level)];
    }
  }

  const auto& finest = model.level_means.back();
  model.residuals.reserve(samples.size());
  for (const auto& s : samples) {
    model.residuals.push_back(s.color -
                              finest[cell_index(s.x, s.y, R - 1)]);
  }

  model.laws.assign(static_cast<std::size_t>(R), LayerLaw{EmpiricalResample{}});
  return model;
}

std::vector<ImageSample> simulate_image(const LayeredImageModel& model,
                                        std::size_t n_pixels, SeedSpec seed) {
  check_resolution(model.resolution);
  const int R = model.resolution;
  if (model.laws.size() != static_cast<std::size_t>(R)) {
    throw std::domain_error("model needs one law per random layer");
  }

  rng::Engine g = rng::engine_for(seed, 0);

  // One shared increment draw per cell per layer, then per-pixel residuals.
  std::vector<std::vector<Color>> cell_draws(static_cast<std::size_t>(R - 1));
  for (int level = 1; level < R; ++level) {
    const auto& pool = model.increments[static_cast<std::size_t>(level - 1)];
    auto& draws = cell_draws[static_cast<std::size_t>(level - 1)];
    draws.resize(cells_at(level));
    for (std::size_t c = 0; c < draws.size(); ++c) {
      draws[c] = draw_layer(model.laws[static_cast<std::size_t>(level - 1)],
                            pool, c, false, g);
    }
  }

  const Color base = model.level_means.front().front();
  const LayerLaw& pixel_law = model.laws.back();
  std::vector<ImageSample> out;
  out.reserve(n_pixels);
  for (std::size_t i = 0; i < n_pixels; ++i) {
    ImageSample s;
    s.x = rng::u01(g);
    s.y = rng::u01(g);
    Color c = base;
    for (int level = 1; level < R; ++level) {
      c = c + cell_draws[static_cast<std::size_t>(level - 1)]
                        [cell_index(s.x, s.y, level)];
    }
    c = c + draw_layer(pixel_law, model.residuals, 0, true, g);
    s.color = c;
    out.push_back(s);
  }
  return out;
}

std::vector<ImageSample> read_image_samples(std::istream& is) {
  std::vector<ImageSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    ImageSample s;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &s.x, &s.y,
                    &s.color[0], &s.color[1], &s.color[2]) != 5) {
      throw std::domain_error("image sample line " + std::to_string(lineno) +
                              " is not x,y,r,g,b");
    }
    out.push_back(s);
  }
  return out;
}

void write_image_samples(std::ostream& os,
                         const std::vector<ImageSample>& samples) {
  char buf[160];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n", s.x,
                  s.y, s.color[0], s.color[1], s.color[2]);
    os << buf;
  }
}

}  // namespace inferlab
