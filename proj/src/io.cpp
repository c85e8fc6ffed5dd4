#include "tdk/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace tdk {
namespace {

using nlohmann::json;

constexpr std::array<char, 4> kDatasetMagic{'T', 'D', 'K', '1'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw std::runtime_error("dataset file is truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

std::uint32_t narrow_u32(std::size_t value, const char* what) {
  if (value > std::numeric_limits<std::uint32_t>::max()) throw std::runtime_error(std::string(what) + " too large");
  return static_cast<std::uint32_t>(value);
}

// JSON has no infinities; Fisher scores can be +inf.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::runtime_error("model file: bad number '" + s + "'");
  }
  return j.get<double>();
}

json to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) data.push_back(number(m.data()[i]));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from(const json& j) {
  Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.size()) throw std::runtime_error("model file: matrix size mismatch");
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = number_from(data[static_cast<std::size_t>(i)]);
  return m;
}

json to_json(const Vector& v) {
  json data = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(number(v[i]));
  return data;
}

Vector vector_from(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = number_from(j[static_cast<std::size_t>(i)]);
  return v;
}

json to_json(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const Matrix& m : ms) out.push_back(to_json(m));
  return out;
}

std::vector<Matrix> matrices_from(const json& j) {
  std::vector<Matrix> out;
  for (const json& m : j) out.push_back(matrix_from(m));
  return out;
}

json block_to_json(const Block& b) {
  return {
      {"ranks", b.ranks},
      {"training_nmse", number(b.training_nmse)},
      {"projections", to_json(b.backward.projections)},
      {"patterns", to_json(b.forward.patterns)},
      {"backward_iterations", b.backward.diagnostics.iterations},
      {"forward_iterations", b.forward.iterations},
  };
}

Block block_from(const json& j, const Dims& input_dims) {
  Block b;
  b.ranks = j.at("ranks").get<std::vector<std::size_t>>();
  b.training_nmse = number_from(j.at("training_nmse"));
  b.backward.input_dims = input_dims;
  b.backward.ranks = b.ranks;
  b.backward.projections = matrices_from(j.at("projections"));
  b.backward.diagnostics.iterations = j.value("backward_iterations", 0);
  b.forward.patterns = matrices_from(j.at("patterns"));
  b.forward.iterations = j.value("forward_iterations", 0);
  if (b.backward.projections.size() != input_dims.size() || b.forward.patterns.size() != input_dims.size()) {
    throw std::runtime_error("model file: block has the wrong number of modes");
  }
  for (std::size_t k = 0; k < input_dims.size(); ++k) {
    const auto d = static_cast<Eigen::Index>(input_dims[k]);
    const auto r = static_cast<Eigen::Index>(b.ranks.at(k));
    if (b.backward.projections[k].rows() != d || b.backward.projections[k].cols() != r ||
        b.forward.patterns[k].rows() != d || b.forward.patterns[k].cols() != r) {
      throw std::runtime_error("model file: block matrix shape mismatch in mode " + std::to_string(k));
    }
  }
  return b;
}

}  // namespace

void write_dataset(std::ostream& out, const LabeledDataset& data) {
  data.validate();
  const Dims& dims = data.dims();
  out.write(kDatasetMagic.data(), kDatasetMagic.size());
  put_le<std::uint32_t>(out, narrow_u32(dims.size(), "order"));
  for (std::size_t d : dims) put_le<std::uint32_t>(out, narrow_u32(d, "dimension"));
  put_le<std::uint64_t>(out, data.size());
  put_le<std::uint32_t>(out, narrow_u32(data.class_count(), "class count"));
  for (const Tensor& t : data.samples) {
    for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  for (int c : data.labels) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c));
  if (!out) throw std::runtime_error("failed writing dataset");
}

LabeledDataset read_dataset(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kDatasetMagic) throw std::runtime_error("not a TDK1 dataset file");
  const auto order = get_le<std::uint32_t>(in);
  if (order == 0) throw std::runtime_error("dataset file: order must be positive");
  Dims dims(order);
  for (auto& d : dims) {
    d = get_le<std::uint32_t>(in);
    if (d == 0) throw std::runtime_error("dataset file: zero dimension");
  }
  const auto count = get_le<std::uint64_t>(in);
  const auto classes = get_le<std::uint32_t>(in);
  const std::size_t per_sample = element_count(dims);

  LabeledDataset data;
  // The header is untrusted; a short file fails on read rather than on a huge reserve.
  const auto reserve = static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 16));
  data.samples.reserve(reserve);
  for (std::uint64_t n = 0; n < count; ++n) {
    std::vector<double> values(per_sample);
    for (double& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
    data.samples.emplace_back(dims, std::move(values));
  }
  data.labels.reserve(reserve);
  for (std::uint64_t n = 0; n < count; ++n) {
    const auto c = get_le<std::uint32_t>(in);
    if (c >= classes) throw std::runtime_error("dataset file: label " + std::to_string(c) + " exceeds class count");
    data.labels.push_back(static_cast<int>(c));
  }
  if (data.class_count() != classes) throw std::runtime_error("dataset file: class count does not match labels");
  data.validate();
  return data;
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(out, data);
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

void write_decoder(std::ostream& out, const Decoder& decoder) {
  const BttdaModel& m = decoder.bttda;
  json blocks = json::array();
  for (const Block& b : m.blocks) blocks.push_back(block_to_json(b));

  const FeatureHead& h = decoder.head;
  std::vector<int> active(h.whitener.active.begin(), h.whitener.active.end());
  std::vector<int> keep(h.mask.keep.begin(), h.mask.keep.end());
  json doc = {
      {"format", "tdk-decoder"},
      {"version", kModelFormatVersion},
      {"input_dims", m.input_dims},
      {"theta", m.theta},
      {"truncated_to_single_block", m.truncated_to_single_block},
      {"blocks", std::move(blocks)},
      {"whitener",
       {{"mean", to_json(h.whitener.mean)},
        {"transform", to_json(h.whitener.transform)},
        {"variances", to_json(h.whitener.variances)},
        {"active", active}}},
      {"mask", {{"keep", keep}, {"scores", to_json(h.mask.scores)}}},
      {"lda",
       {{"means", to_json(h.lda.means)},
        {"covariance", to_json(h.lda.covariance)},
        {"log_priors", to_json(h.lda.log_priors)},
        {"shrinkage", h.lda.shrinkage},
        {"coefficients", to_json(h.lda.coefficients)},
        {"intercepts", to_json(h.lda.intercepts)}}},
  };
  out << doc.dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing model");
}

namespace {

Decoder decoder_from(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "tdk-decoder") {
    throw std::runtime_error("not a tdk decoder model file");
  }
  const int version = doc.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw std::runtime_error("unsupported model file version " + std::to_string(version));
  }
  Decoder d;
  BttdaModel& m = d.bttda;
  m.input_dims = doc.at("input_dims").get<Dims>();
  m.theta = doc.at("theta").get<double>();
  m.truncated_to_single_block = doc.at("truncated_to_single_block").get<bool>();
  for (const json& b : doc.at("blocks")) m.blocks.push_back(block_from(b, m.input_dims));
  if (m.blocks.empty()) throw std::runtime_error("model file: no blocks");

  const json& w = doc.at("whitener");
  d.head.whitener.mean = vector_from(w.at("mean"));
  d.head.whitener.transform = matrix_from(w.at("transform"));
  d.head.whitener.variances = vector_from(w.at("variances"));
  for (int a : w.at("active").get<std::vector<int>>()) d.head.whitener.active.push_back(a != 0);

  const json& mask = doc.at("mask");
  for (int k : mask.at("keep").get<std::vector<int>>()) d.head.mask.keep.push_back(k != 0);
  d.head.mask.scores = vector_from(mask.at("scores"));

  const json& lda = doc.at("lda");
  d.head.lda.means = matrix_from(lda.at("means"));
  d.head.lda.covariance = matrix_from(lda.at("covariance"));
  d.head.lda.log_priors = vector_from(lda.at("log_priors"));
  d.head.lda.shrinkage = lda.at("shrinkage").get<double>();
  d.head.lda.coefficients = matrix_from(lda.at("coefficients"));
  d.head.lda.intercepts = vector_from(lda.at("intercepts"));

  if (d.head.whitener.input_width() != m.feature_count() ||
      d.head.mask.keep.size() != d.head.whitener.input_width() ||
      d.head.lda.width() != d.head.mask.kept()) {
    throw std::runtime_error("model file: feature widths are inconsistent");
  }
  return d;
}

}  // namespace

Decoder read_decoder(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    return decoder_from(doc);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model file: ") + e.what());
  }
}

void save_decoder(const std::filesystem::path& path, const Decoder& decoder) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_decoder(out, decoder);
}

Decoder load_decoder(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_decoder(in);
}

}  // namespace tdk
