// Replicating-subunit models: block decompositions of symbol sequences and
// layered resolution models for spatial color data, with their simulators.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "inferlab/distmodel.hpp"
#include "inferlab/rng.hpp"

namespace inferlab {

// ---------------------------------------------------------- symbol blocks ---

struct SymbolSequence {
  std::string symbols;  // one character per symbol
  std::size_t length() const { return symbols.size(); }
  friend bool operator==(const SymbolSequence&,
                         const SymbolSequence&) = default;
};

struct BlockModel {
  std::size_t block_length = 1;
  // Key: one block of symbols; value: its empirical frequency, an exact
  // ratio of counts.
  std::map<std::string, double> block_frequencies;
};

// Frequencies of the non-overlapping blocks of the sequence; a trailing
// partial block is discarded.
BlockModel fit_block_model(const SymbolSequence& seq, std::size_t block_length);

// Samples whole blocks with replacement until at least min_length symbols.
SymbolSequence simulate_sequence(const BlockModel& model,
                                 std::size_t min_length, SeedSpec seed);

SymbolSequence parse_sequence_line(const std::string& line);
std::string sequence_line(const SymbolSequence& seq);

// ---------------------------------------------------------- layered images --

using Color = std::array<double, 3>;  // r, g, b

struct ImageSample {
  double x = 0.0;  // position in the unit square
  double y = 0.0;
  Color color{0.0, 0.0, 0.0};
};

// Resample one of the fitted increments of the layer, uniformly.
struct EmpiricalResample {
  friend bool operator==(const EmpiricalResample&,
                         const EmpiricalResample&) = default;
};

// Use each cell's own fitted increment (zero for the pixel layer).
struct CellPointMass {
  friend bool operator==(const CellPointMass&, const CellPointMass&) = default;
};

struct LayerLaw {
  std::variant<EmpiricalResample, CellPointMass, NoiseSpec> v;
  friend bool operator==(const LayerLaw&, const LayerLaw&) = default;
};

// Resolution R model: a base color, per-cell means on the dyadic grids up to
// level R-1 (level l has 4^l cells), and one law per random layer. Layers
// 1..R-1 perturb whole cells; the last law is the per-pixel residual.
struct LayeredImageModel {
  int resolution = 1;  // R in 1..3
  // level_means[l] has 4^l entries, row-major by (iy, ix) at scale 2^l.
  std::vector<std::vector<Color>> level_means;
  // increments[l-1][c] = level_means[l][c] - parent mean, for l in 1..R-1.
  std::vector<std::vector<Color>> increments;
  std::vector<Color> residuals;  // per training sample at the finest level
  std::vector<LayerLaw> laws;    // size R: cell layers 1..R-1, then pixels
};

// Cell index of a unit-square position on the 2^level grid, row-major.
std::size_t cell_index(double x, double y, int level);

// Per-cell sample means at every level plus layer increments and residuals.
// Throws std::domain_error naming the first empty cell at the finest level.
LayeredImageModel fit_layers(const std::vector<ImageSample>& samples, int R);

// Fresh uniform positions; each color is the base mean plus one draw per
// cell layer (shared by all pixels of the cell) plus a pixel residual draw.
std::vector<ImageSample> simulate_image(const LayeredImageModel& model,
                                        std::size_t n_pixels, SeedSpec seed);

// Rows of `x,y,r,g,b`.
std::vector<ImageSample> read_image_samples(std::istream& is);
void write_image_samples(std::ostream& os,
                         const std::vector<ImageSample>& samples);

}  // namespace inferlab
