#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "ppde/families.hpp"
#include "ppde/fem.hpp"
#include "ppde/mesh.hpp"

namespace ppde {

static_assert(std::endian::native == std::endian::little,
              "dataset files are little-endian; big-endian hosts are not supported");

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double default_rhs(const Eigen::Vector2d& x) { return 20.0 + 10.0 * x.x() - 5.0 * x.y(); }
inline constexpr const char* kDefaultRhsTag = "f=20+10*x1-5*x2";

struct DatasetRecord {
  Eigen::VectorXd y;
  FeVector u;
};

struct Dataset {
  ParametricFamily family;
  int mesh_n = 0;
  int D = 0;
  std::uint64_t seed = 0;
  std::string rhs_tag = kDefaultRhsTag;
  std::vector<DatasetRecord> records;

  int count() const { return static_cast<int>(records.size()); }
};

struct DatasetHeader {
  ParametricFamily family;
  int mesh_n = 0;
  int D = 0;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
};

inline std::vector<double> coefficient_at_barycenters(const ParametricFamily& family,
                                                      const Eigen::VectorXd& y, const Mesh& mesh) {
  std::vector<double> coeff(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    coeff[t] = evaluate(family, y, barycenter(mesh, mesh.triangles[t]));
  return coeff;
}

// Solves the diffusion problem for every given parameter vector. Work is
// split across threads by record index; record j never depends on the split.
inline Dataset generate_from_parameters(const ParametricFamily& family, const Mesh& mesh,
                                        const SparseMatrix& gram,
                                        const std::vector<Eigen::VectorXd>& parameters,
                                        std::uint64_t seed, int threads = 0) {
  validate(family);
  Dataset ds;
  ds.family = family;
  ds.mesh_n = mesh.n;
  ds.D = mesh.dof_count();
  ds.seed = seed;
  ds.records.resize(parameters.size());

  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(parameters.size())));

  std::vector<std::string> failures(threads);
  auto worker = [&](int w) {
    try {
      for (std::size_t j = w; j < parameters.size(); j += threads) {
        const auto coeff = coefficient_at_barycenters(family, parameters[j], mesh);
        FemSystem system = assemble_system(mesh, coeff, default_rhs, gram);
        ds.records[j] = {parameters[j], solve(system)};
      }
    } catch (const std::exception& e) {
      failures[w] = e.what();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (!f.empty()) throw NumericalFailure("generate: sample failed: " + f);
  return ds;
}

inline Dataset generate(const ParametricFamily& family, const Mesh& mesh, const SparseMatrix& gram,
                        int count, std::uint64_t seed, int threads = 0) {
  return generate_from_parameters(family, mesh, gram, sample_parameters(family, count, seed), seed,
                                  threads);
}

inline Dataset generate(const ParametricFamily& family, int mesh_n, int count, std::uint64_t seed,
                        int threads = 0) {
  const Mesh mesh = build_mesh(mesh_n);
  return generate(family, mesh, assemble_gram(mesh), count, seed, threads);
}

namespace detail {

inline void write_bytes(std::ostream& out, const void* data, std::size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

template <typename T>
void write_scalar(std::ostream& out, T value) {
  write_bytes(out, &value, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T read() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in_) throw FormatError("dataset file truncated at byte offset " + std::to_string(offset_));
    offset_ += sizeof(T);
    return value;
  }

  void read_doubles(double* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in_) throw FormatError("dataset file truncated at byte offset " + std::to_string(offset_));
    offset_ += n * sizeof(double);
  }

  std::size_t offset() const { return offset_; }

  bool at_eof() {
    in_.peek();
    return in_.eof();
  }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

inline DatasetHeader read_dataset_header(Reader& reader) {
  char magic[4];
  for (char& c : magic) c = reader.read<char>();
  if (std::memcmp(magic, "PPDE", 4) != 0) throw FormatError("bad magic at byte offset 0");
  const auto version = reader.read<std::uint32_t>();
  if (version != 1)
    throw FormatError("unsupported dataset version " + std::to_string(version) + " at byte offset 4");

  DatasetHeader h;
  const auto tag = reader.read<std::uint8_t>();
  if (tag < 1 || tag > 5) throw FormatError("unknown family tag at byte offset 8");
  h.family.variant = static_cast<FamilyVariant>(tag);
  h.family.p = static_cast<int>(reader.read<std::uint32_t>());
  h.family.s = static_cast<int>(reader.read<std::uint32_t>());
  h.family.k = static_cast<int>(reader.read<std::uint32_t>());
  h.family.sigma = reader.read<double>();
  h.family.mu = reader.read<double>();
  h.family.r = reader.read<double>();
  h.mesh_n = static_cast<int>(reader.read<std::uint32_t>());
  h.D = static_cast<int>(reader.read<std::uint32_t>());
  h.count = reader.read<std::uint64_t>();
  h.seed = reader.read<std::uint64_t>();
  validate(h.family);
  if (h.mesh_n < 3 || h.D != h.mesh_n * h.mesh_n)
    throw FormatError("inconsistent mesh header fields");
  return h;
}

}  // namespace detail

// On-disk layout (little-endian): "PPDE", version u32, family tag u8,
// p u32, s u32, k u32, sigma f64, mu f64, r f64 (unused fields zero),
// mesh_n u32, D u32, count u64, seed u64, then per record p f64 + D f64.
inline void save(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save: cannot open " + path.string());
  detail::write_bytes(out, "PPDE", 4);
  detail::write_scalar<std::uint32_t>(out, 1);
  detail::write_scalar<std::uint8_t>(out, static_cast<std::uint8_t>(ds.family.variant));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(ds.family.p));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(ds.family.s));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(ds.family.k));
  detail::write_scalar<double>(out, ds.family.sigma);
  detail::write_scalar<double>(out, ds.family.mu);
  detail::write_scalar<double>(out, ds.family.r);
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(ds.mesh_n));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(ds.D));
  detail::write_scalar<std::uint64_t>(out, static_cast<std::uint64_t>(ds.records.size()));
  detail::write_scalar<std::uint64_t>(out, ds.seed);
  for (const auto& rec : ds.records) {
    detail::write_bytes(out, rec.y.data(), static_cast<std::size_t>(rec.y.size()) * sizeof(double));
    detail::write_bytes(out, rec.u.data(), static_cast<std::size_t>(rec.u.size()) * sizeof(double));
  }
  if (!out) throw std::runtime_error("save: write failed for " + path.string());
}

inline DatasetHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_header: cannot open " + path.string());
  detail::Reader reader(in);
  return detail::read_dataset_header(reader);
}

inline Dataset load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load: cannot open " + path.string());
  detail::Reader reader(in);
  const DatasetHeader h = detail::read_dataset_header(reader);

  Dataset ds;
  ds.family = h.family;
  ds.mesh_n = h.mesh_n;
  ds.D = h.D;
  ds.seed = h.seed;
  ds.records.resize(h.count);
  for (auto& rec : ds.records) {
    rec.y.resize(h.family.p);
    reader.read_doubles(rec.y.data(), static_cast<std::size_t>(h.family.p));
    rec.u.resize(h.D);
    reader.read_doubles(rec.u.data(), static_cast<std::size_t>(h.D));
  }
  if (!reader.at_eof())
    throw FormatError("trailing data after last record at byte offset " +
                      std::to_string(reader.offset()));
  return ds;
}

}  // namespace ppde
