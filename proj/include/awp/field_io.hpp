#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "awp/grid.hpp"

namespace awp {

/// Binary field file: one text line
///   AWP1 nx ny pitch_m wavelength_m plane_label
/// followed by nx*ny (re, im) little-endian float32 pairs, row-major.
void write_field(std::ostream& os, const SampledField& f);
SampledField read_field(std::istream& is);

void save_field(const std::string& path, const SampledField& f);
SampledField load_field(const std::string& path);

/// 8-bit binary PGM (P5) of values scaled to their maximum. A 1-D field
/// becomes a single-row image.
void write_pgm(std::ostream& os, const std::vector<double>& values, int width, int height);
void save_pgm(const std::string& path, const std::vector<double>& values, int width, int height);

/// |a|^2 preview of a field.
void save_field_pgm(const std::string& path, const SampledField& f);

}  // namespace awp
