#pragma once

// MNIST IDX ingestion (raw or gzip) and a seeded synthetic stand-in with the
// same shape contract.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "satfl/errors.hpp"
#include "satfl/learn.hpp"

namespace satfl {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // 2049

namespace detail {

// gzread passes uncompressed files through unchanged.
inline std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw IngestionError("cannot open " + path.string());
  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 16> buf{};
  int n = 0;
  while ((n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()))) > 0)
    out.insert(out.end(), buf.begin(), buf.begin() + n);
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw IngestionError("corrupt compressed stream in " + path.string());
  return out;
}

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  if (off + 4 > b.size()) throw IngestionError("truncated IDX header");
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

}  // namespace detail

struct IdxImages {
  std::uint32_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
};

inline IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes) {
  if (detail::read_be32(bytes, 0) != kIdxImageMagic) throw IngestionError("bad IDX image magic");
  IdxImages img;
  img.count = detail::read_be32(bytes, 4);
  img.rows = detail::read_be32(bytes, 8);
  img.cols = detail::read_be32(bytes, 12);
  const std::size_t n = std::size_t{img.count} * img.rows * img.cols;
  if (bytes.size() < 16 + n) throw IngestionError("truncated IDX image payload");
  img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n));
  return img;
}

inline std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
  if (detail::read_be32(bytes, 0) != kIdxLabelMagic) throw IngestionError("bad IDX label magic");
  const std::uint32_t n = detail::read_be32(bytes, 4);
  if (bytes.size() < 8 + std::size_t{n}) throw IngestionError("truncated IDX label payload");
  return {bytes.begin() + 8, bytes.begin() + 8 + n};
}

// Pixels scaled by 1/255.
inline Dataset load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = parse_idx_images(detail::read_maybe_gzip(images));
  const auto lab = parse_idx_labels(detail::read_maybe_gzip(labels));
  if (lab.size() != img.count)
    throw IngestionError("image/label count mismatch: " + images.string() + " vs " + labels.string());
  Dataset d;
  d.feature_dim = std::size_t{img.rows} * img.cols;
  d.num_classes = 10;
  d.features.resize(img.pixels.size());
  std::transform(img.pixels.begin(), img.pixels.end(), d.features.begin(),
                 [](std::uint8_t p) { return static_cast<float>(p) / 255.0f; });
  for (auto l : lab)
    if (l >= d.num_classes) throw IngestionError("label out of range in " + labels.string());
  d.labels = lab;
  return d;
}

struct TrainTest {
  Dataset train;
  Dataset test;
};

// Looks for the canonical file names, gzip or raw, in `dir`.
inline TrainTest load_mnist(const std::filesystem::path& dir) {
  auto find = [&](const std::string& stem) {
    for (const auto& cand : {stem, stem + ".gz"}) {
      const auto p = dir / cand;
      if (std::filesystem::exists(p)) return p;
    }
    throw IngestionError("missing MNIST file " + (dir / stem).string() +
                         "[.gz]; download the four IDX files from the MNIST distribution into " +
                         dir.string() + " or set [dataset] source = synthetic");
  };
  return {load_idx_pair(find("train-images-idx3-ubyte"), find("train-labels-idx1-ubyte")),
          load_idx_pair(find("t10k-images-idx3-ubyte"), find("t10k-labels-idx1-ubyte"))};
}

struct SyntheticSpec {
  std::size_t train_samples = 12000;
  std::size_t test_samples = 2000;
  std::size_t feature_dim = 784;
  std::size_t num_classes = 10;
  std::uint64_t seed = 7;
  double keep_prob = 0.3;     // chance a prototype pixel is lit
  double borrow_max = 0.3;    // max fraction of a second class's pixels mixed in
  int speckle = 150;          // random background pixels per sample
  double label_noise = 0.0;   // fraction of samples with a uniformly random label
};

// Ten sparse "glyph" prototypes on a 28x28 canvas. Each sample lights a
// random subset of its class's pixels, borrows a fraction of another class's
// pixels and adds background speckle. With the defaults a linear model
// plateaus around 91% test accuracy.
inline TrainTest make_synthetic(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pixel(0, spec.feature_dim - 1);
  std::uniform_int_distribution<std::size_t> klass(0, spec.num_classes - 1);

  const std::size_t active = std::max<std::size_t>(4, spec.feature_dim / 6);
  std::vector<std::vector<std::uint32_t>> proto(spec.num_classes);
  for (auto& p : proto) {
    std::vector<char> used(spec.feature_dim, 0);
    while (p.size() < active) {
      const auto j = pixel(rng);
      if (!used[j]) {
        used[j] = 1;
        p.push_back(static_cast<std::uint32_t>(j));
      }
    }
  }

  auto draw = [&](std::size_t n) {
    Dataset d;
    d.feature_dim = spec.feature_dim;
    d.num_classes = spec.num_classes;
    std::vector<float> x(spec.feature_dim);
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(x.begin(), x.end(), 0.0f);
      const std::size_t c = i % spec.num_classes;
      const std::size_t other = (c + 1 + klass(rng) % (spec.num_classes - 1)) % spec.num_classes;
      const double borrow = spec.borrow_max * unit(rng);
      for (auto j : proto[c])
        if (unit(rng) < spec.keep_prob) x[j] = static_cast<float>(0.4 + 0.6 * unit(rng));
      for (auto j : proto[other])
        if (unit(rng) < borrow) x[j] = std::max(x[j], static_cast<float>(0.3 + 0.7 * unit(rng)));
      for (int s = 0; s < spec.speckle; ++s) x[pixel(rng)] = static_cast<float>(unit(rng));
      const std::size_t label = unit(rng) < spec.label_noise ? klass(rng) : c;
      d.push_back(x, static_cast<std::uint8_t>(label));
    }
    return d;
  };
  TrainTest tt{draw(spec.train_samples), draw(spec.test_samples)};
  return tt;
}

}  // namespace satfl
