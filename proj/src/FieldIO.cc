/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/FieldIO.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "obsimpact/Errors.h"

namespace obsimpact {

namespace {

constexpr char kMagic[4] = {'S', 'W', 'E', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void putLittleEndian(std::ostream & os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t k = 0; k < sizeof(T) / 2; ++k) std::swap(bytes[k], bytes[sizeof(T) - 1 - k]);
  }
  os.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T getLittleEndian(std::istream & is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(bytes), sizeof(T))) {
    throw IoError("SWEF stream truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t k = 0; k < sizeof(T) / 2; ++k) std::swap(bytes[k], bytes[sizeof(T) - 1 - k]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

// -----------------------------------------------------------------------------
void writeSwef(std::ostream & os, const StateVector & x) {
  os.write(kMagic, 4);
  putLittleEndian<std::uint32_t>(os, kVersion);
  putLittleEndian<std::uint32_t>(os, static_cast<std::uint32_t>(x.q()));
  putLittleEndian<std::uint32_t>(os, 3u);
  for (int k = 0; k < x.size(); ++k) putLittleEndian<double>(os, x.values()[k]);
  if (!os) throw IoError("failed writing SWEF stream");
}

// -----------------------------------------------------------------------------
StateVector readSwef(std::istream & is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a SWEF stream (bad magic)");
  }
  const auto version = getLittleEndian<std::uint32_t>(is);
  if (version != kVersion) throw IoError("unsupported SWEF version " + std::to_string(version));
  const auto q = getLittleEndian<std::uint32_t>(is);
  const auto nvars = getLittleEndian<std::uint32_t>(is);
  if (nvars != 3u) throw IoError("SWEF nvars must be 3");
  if (q == 0 || q > 100000) throw IoError("SWEF grid size out of range");
  StateVector x(static_cast<int>(q));
  for (int k = 0; k < x.size(); ++k) x.values()[k] = getLittleEndian<double>(is);
  return x;
}

// -----------------------------------------------------------------------------
void writeSwefFile(const std::string & path, const StateVector & x) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  writeSwef(os, x);
}

StateVector readSwefFile(const std::string & path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return readSwef(is);
}

// -----------------------------------------------------------------------------
void writeFieldCsv(std::ostream & os, const StateVector & x) {
  os << "var,i,j,value\n";
  os << std::setprecision(17);
  for (Var v : {Var::H, Var::UH, Var::VH}) {
    for (int i = 0; i < x.q(); ++i) {
      for (int j = 0; j < x.q(); ++j) {
        os << varName(v) << ',' << i << ',' << j << ',' << x(v, i, j) << '\n';
      }
    }
  }
}

}  // namespace obsimpact
