#include "pfmap/datasets.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pfmap/rng.hpp"

namespace pfmap {

namespace {

std::uint32_t read_u32_be(std::istream& f, const char* what) {
  unsigned char buf[4];
  f.read(reinterpret_cast<char*>(buf), 4);
  if (!f) throw std::runtime_error(std::string("truncated file reading ") + what);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u32_be(std::ostream& f, std::uint32_t v) {
  const unsigned char buf[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  f.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

RawDataset load_idx(const std::string& images_path,
                    const std::string& labels_path) {
  std::ifstream fi(images_path, std::ios::binary);
  if (!fi) throw std::runtime_error("load_idx: cannot open " + images_path);
  std::ifstream fl(labels_path, std::ios::binary);
  if (!fl) throw std::runtime_error("load_idx: cannot open " + labels_path);

  if (read_u32_be(fi, "image magic") != 0x00000803u)
    throw std::runtime_error("load_idx: bad image magic in " + images_path);
  const std::uint32_t n_images = read_u32_be(fi, "image count");
  const std::uint32_t rows = read_u32_be(fi, "rows");
  const std::uint32_t cols = read_u32_be(fi, "cols");

  if (read_u32_be(fl, "label magic") != 0x00000801u)
    throw std::runtime_error("load_idx: bad label magic in " + labels_path);
  const std::uint32_t n_labels = read_u32_be(fl, "label count");
  if (n_images != n_labels)
    throw std::runtime_error("load_idx: image/label count mismatch");

  const std::size_t dim = static_cast<std::size_t>(rows) * cols;
  RawDataset d;
  d.source = images_path;
  d.inputs.resize(n_images, dim);
  d.labels.resize(n_labels);

  std::vector<unsigned char> row(dim);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    fi.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(dim));
    if (!fi) throw std::runtime_error("load_idx: truncated image payload");
    for (std::size_t j = 0; j < dim; ++j)
      d.inputs(i, static_cast<Eigen::Index>(j)) = row[j] / 255.0;
  }
  fl.read(reinterpret_cast<char*>(d.labels.data()),
          static_cast<std::streamsize>(n_labels));
  if (!fl) throw std::runtime_error("load_idx: truncated label payload");
  for (std::uint8_t l : d.labels)
    if (l > 9) throw std::runtime_error("load_idx: label out of 0-9");
  return d;
}

void write_idx(const RawDataset& data, int rows, int cols,
               const std::string& images_path, const std::string& labels_path) {
  if (data.inputs.cols() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("write_idx: dims do not match input width");
  if (static_cast<std::size_t>(data.inputs.rows()) != data.labels.size())
    throw std::invalid_argument("write_idx: image/label count mismatch");

  std::ofstream fi(images_path, std::ios::binary);
  if (!fi) throw std::runtime_error("write_idx: cannot open " + images_path);
  write_u32_be(fi, 0x00000803u);
  write_u32_be(fi, static_cast<std::uint32_t>(data.inputs.rows()));
  write_u32_be(fi, static_cast<std::uint32_t>(rows));
  write_u32_be(fi, static_cast<std::uint32_t>(cols));
  std::vector<unsigned char> row(static_cast<std::size_t>(data.inputs.cols()));
  for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.inputs.cols(); ++j)
      row[static_cast<std::size_t>(j)] = static_cast<unsigned char>(
          std::lround(data.inputs(i, j) * 255.0));
    fi.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size()));
  }

  std::ofstream fl(labels_path, std::ios::binary);
  if (!fl) throw std::runtime_error("write_idx: cannot open " + labels_path);
  write_u32_be(fl, 0x00000801u);
  write_u32_be(fl, static_cast<std::uint32_t>(data.labels.size()));
  fl.write(reinterpret_cast<const char*>(data.labels.data()),
           static_cast<std::streamsize>(data.labels.size()));
}

RawDataset load_cifar10(const std::vector<std::string>& batch_files) {
  constexpr std::size_t kDim = 3072;
  constexpr std::size_t kRecord = 1 + kDim;

  std::vector<std::vector<unsigned char>> records;
  for (const std::string& path : batch_files) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_cifar10: cannot open " + path);
    std::vector<unsigned char> rec(kRecord);
    for (;;) {
      f.read(reinterpret_cast<char*>(rec.data()),
             static_cast<std::streamsize>(kRecord));
      if (f.gcount() == 0 && f.eof()) break;
      if (static_cast<std::size_t>(f.gcount()) != kRecord)
        throw std::runtime_error("load_cifar10: truncated record in " + path);
      records.push_back(rec);
    }
  }
  if (records.empty()) throw std::runtime_error("load_cifar10: no records");

  RawDataset d;
  d.source = batch_files.front();
  d.inputs.resize(static_cast<Eigen::Index>(records.size()), kDim);
  d.labels.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i][0] > 9)
      throw std::runtime_error("load_cifar10: label out of 0-9");
    d.labels[i] = records[i][0];
    for (std::size_t j = 0; j < kDim; ++j)
      d.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          records[i][1 + j] / 255.0;
  }
  return d;
}

BitVec binarize(const std::vector<std::uint8_t>& raw_labels) {
  BitVec b(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    if (raw_labels[i] > 9)
      throw std::invalid_argument("binarize: label out of 0-9");
    if (raw_labels[i] >= 5) b.set(i, 1);
  }
  return b;
}

LabeledSet make_binarized(const RawDataset& raw) {
  LabeledSet s;
  s.inputs = raw.inputs;
  s.labels = binarize(raw.labels);
  s.source = raw.source;
  return s;
}

BitVec corrupt(const BitVec& labels, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("corrupt: p out of [0,1]");
  Rng rng(seed);
  BitVec out = labels;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (rng.u01() < p) out.set(i, rng.u01() < 0.5 ? 0 : 1);
  return out;
}

LabeledSet subsample(const LabeledSet& set, std::size_t m, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(set.inputs.rows());
  if (m > n) throw std::invalid_argument("subsample: m > set size");
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j =
        k + rng.below(static_cast<std::uint32_t>(n - k));
    std::swap(idx[k], idx[j]);
  }
  LabeledSet out;
  out.source = set.source;
  out.inputs.resize(static_cast<Eigen::Index>(m), set.inputs.cols());
  out.labels = BitVec(m);
  for (std::size_t k = 0; k < m; ++k) {
    out.inputs.row(static_cast<Eigen::Index>(k)) =
        set.inputs.row(static_cast<Eigen::Index>(idx[k]));
    out.labels.set(k, set.labels.get(idx[k]));
  }
  return out;
}

void save_labeled(const LabeledSet& set, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_labeled: cannot open " + path);
  f << "pfmap-labeled 1\n"
    << set.inputs.rows() << " " << set.inputs.cols() << "\n"
    << set.source << "\n";
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    const char c = static_cast<char>(set.labels.get(i));
    f.write(&c, 1);
  }
  for (Eigen::Index i = 0; i < set.inputs.rows(); ++i)
    for (Eigen::Index j = 0; j < set.inputs.cols(); ++j) {
      const float v = static_cast<float>(set.inputs(i, j));
      f.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  if (!f) throw std::runtime_error("save_labeled: write failed");
}

LabeledSet load_labeled(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_labeled: cannot open " + path);
  std::string magic, version;
  f >> magic >> version;
  if (magic != "pfmap-labeled" || version != "1")
    throw std::runtime_error("load_labeled: bad header");
  Eigen::Index m, dim;
  f >> m >> dim;
  f.get();  // newline
  LabeledSet s;
  std::getline(f, s.source);
  if (!f || m < 0 || dim < 1)
    throw std::runtime_error("load_labeled: bad header fields");
  s.labels = BitVec(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    char c;
    f.read(&c, 1);
    if (c) s.labels.set(static_cast<std::size_t>(i), 1);
  }
  s.inputs.resize(m, dim);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      float v;
      f.read(reinterpret_cast<char*>(&v), sizeof v);
      s.inputs(i, j) = v;
    }
  if (!f) throw std::runtime_error("load_labeled: truncated payload");
  return s;
}

RawDataset synthetic_images(std::size_t count, int side, std::uint64_t seed) {
  if (side < 4) throw std::invalid_argument("synthetic_images: side too small");
  Rng rng(seed);
  const int dim = side * side;

  // class c blob center: five columns, top row for classes 0-4, bottom
  // row for 5-9
  auto center = [&](int cls, double& cx, double& cy) {
    cx = (0.5 + (cls % 5)) / 5.0 * side;
    cy = (cls < 5 ? 0.28 : 0.72) * side;
  };

  RawDataset d;
  d.source = "synthetic";
  d.inputs.resize(static_cast<Eigen::Index>(count), dim);
  d.labels.resize(count);
  const double radius = side / 6.0;
  for (std::size_t i = 0; i < count; ++i) {
    const int cls = static_cast<int>(rng.below(10));
    d.labels[i] = static_cast<std::uint8_t>(cls);
    double cx, cy;
    center(cls, cx, cy);
    cx += (rng.u01() - 0.5) * side / 8.0;
    cy += (rng.u01() - 0.5) * side / 8.0;
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        const double dx = x - cx, dy = y - cy;
        double v = 0.9 * std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius));
        v += 0.08 * (rng.u01() - 0.5);
        v = std::min(std::max(v, 0.0), 1.0);
        const int byte = static_cast<int>(std::lround(v * 255.0));
        d.inputs(static_cast<Eigen::Index>(i), y * side + x) = byte / 255.0;
      }
  }
  return d;
}

}  // namespace pfmap
