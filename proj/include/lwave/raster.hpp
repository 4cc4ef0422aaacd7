/*
 *   Copyright 2026 The lwave Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file
 *
 * Raster material models and grid snapshots.
 *
 * Binary layout, all integers and floats little-endian:
 *
 *   char[8]   magic "LWRASTER"
 *   uint32    format version (1)
 *   uint32    n_r, n_z, n_params
 *   float64   origin_r, origin_z, spacing_r, spacing_z
 *   n_params x { uint32 name length, name bytes }
 *   n_params x n_r x n_z float64 values, z fastest
 *
 * The origin is the center of cell (0, 0); cell (i, k) is centered at
 * (origin_r + i spacing_r, origin_z + k spacing_z). Queries use the nearest
 * cell without interpolation.
 *
 * The text variant carries the same content:
 *
 *   LWRTEXT 1
 *   dims <n_r> <n_z>
 *   origin <r0> <z0>
 *   spacing <dr> <dz>
 *   params <name>...
 *   <values, parameter by parameter, z fastest>
 */

#ifndef LWAVE_RASTER_HPP
#define LWAVE_RASTER_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace lwave {

enum class RasterErrc {
	io_error = 1,
	malformed_header = 2,
	short_payload = 3,
	nonpositive_value = 4,
	unknown_parameter = 5,
	out_of_domain = 6,
};

class RasterError : public std::runtime_error {
public:
	RasterError(RasterErrc code, const std::string &what) : std::runtime_error(what), code_(code) {}
	RasterErrc code() const { return code_; }

private:
	RasterErrc code_;
};

struct RasterModel {
	std::uint32_t nr = 0;
	std::uint32_t nz = 0;
	double origin_r = 0.0;
	double origin_z = 0.0;
	double spacing_r = 1.0;
	double spacing_z = 1.0;
	std::vector<std::string> names;
	std::vector<std::vector<double>> values; // one nr*nz grid per parameter

	std::size_t param_index(const std::string &name) const {
		for (std::size_t p = 0; p < names.size(); ++p) {
			if (names[p] == name) {
				return p;
			}
		}
		throw RasterError(RasterErrc::unknown_parameter, "raster: no parameter named '" + name + "'");
	}

	/// Nearest-cell value; ties go to the higher index.
	double query(std::size_t param, double r, double z) const {
		const double fr = (r - origin_r) / spacing_r;
		const double fz = (z - origin_z) / spacing_z;
		if (fr < -0.5 || fz < -0.5 || fr > static_cast<double>(nr) - 0.5 || fz > static_cast<double>(nz) - 0.5) {
			throw RasterError(RasterErrc::out_of_domain, "raster: query (" + std::to_string(r) + ", " +
			                                                 std::to_string(z) + ") outside the model");
		}
		const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::floor(fr + 0.5)), nr - 1);
		const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::floor(fz + 0.5)), nz - 1);
		return values.at(param)[i * nz + k];
	}

	double query(const std::string &name, double r, double z) const { return query(param_index(name), r, z); }

	ScalarField field(const std::string &name) const {
		const auto p = param_index(name);
		auto self = std::make_shared<const RasterModel>(*this);
		return [self, p](double r, double z) { return self->query(p, r, z); };
	}
};

namespace detail {

static_assert(std::endian::native == std::endian::little, "raster I/O assumes a little-endian host");

inline constexpr char kRasterMagic[8] = {'L', 'W', 'R', 'A', 'S', 'T', 'E', 'R'};
inline constexpr std::uint32_t kRasterVersion = 1;

template <typename T> void write_pod(std::ostream &os, const T &v) {
	os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T> bool read_pod(std::istream &is, T &v) {
	is.read(reinterpret_cast<char *>(&v), sizeof(T));
	return static_cast<bool>(is);
}

inline void validate_header(const RasterModel &m) {
	if (m.nr < 2 || m.nz < 2) {
		throw RasterError(RasterErrc::malformed_header, "raster: dimensions must be at least 2x2");
	}
	if (m.names.empty()) {
		throw RasterError(RasterErrc::malformed_header, "raster: no parameters");
	}
	if (!(m.spacing_r > 0.0) || !(m.spacing_z > 0.0) || !std::isfinite(m.origin_r) || !std::isfinite(m.origin_z)) {
		throw RasterError(RasterErrc::malformed_header, "raster: spacing must be positive and origin finite");
	}
}

inline RasterModel read_binary(std::istream &is, const std::string &path) {
	RasterModel m;
	std::uint32_t version = 0;
	std::uint32_t np = 0;
	if (!read_pod(is, version) || !read_pod(is, m.nr) || !read_pod(is, m.nz) || !read_pod(is, np) ||
	    !read_pod(is, m.origin_r) || !read_pod(is, m.origin_z) || !read_pod(is, m.spacing_r) ||
	    !read_pod(is, m.spacing_z)) {
		throw RasterError(RasterErrc::malformed_header, "raster: truncated header in " + path);
	}
	if (version != kRasterVersion) {
		throw RasterError(RasterErrc::malformed_header, "raster: unsupported version " + std::to_string(version));
	}
	if (np == 0 || np > 64) {
		throw RasterError(RasterErrc::malformed_header, "raster: bad parameter count " + std::to_string(np));
	}
	for (std::uint32_t p = 0; p < np; ++p) {
		std::uint32_t len = 0;
		if (!read_pod(is, len) || len == 0 || len > 256) {
			throw RasterError(RasterErrc::malformed_header, "raster: bad parameter name in " + path);
		}
		std::string name(len, '\0');
		if (!is.read(name.data(), len)) {
			throw RasterError(RasterErrc::malformed_header, "raster: truncated parameter name in " + path);
		}
		m.names.push_back(std::move(name));
	}
	validate_header(m);
	const std::size_t count = static_cast<std::size_t>(m.nr) * m.nz;
	for (std::uint32_t p = 0; p < np; ++p) {
		std::vector<double> v(count);
		is.read(reinterpret_cast<char *>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
		if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double)) {
			throw RasterError(RasterErrc::short_payload, "raster: payload shorter than declared in " + path);
		}
		m.values.push_back(std::move(v));
	}
	return m;
}

inline RasterModel read_text(std::istream &is, const std::string &path) {
	RasterModel m;
	auto header_line = [&](const char *key) {
		std::string line;
		while (std::getline(is, line)) {
			if (!line.empty() && line[0] != '#') {
				break;
			}
		}
		std::istringstream ls(line);
		std::string k;
		ls >> k;
		if (k != key) {
			throw RasterError(RasterErrc::malformed_header,
			                  "raster: expected '" + std::string(key) + "' line in " + path);
		}
		return ls.str().substr(std::min(ls.str().size(), static_cast<std::size_t>(ls.tellg())));
	};
	{
		std::istringstream s(header_line("dims"));
		if (!(s >> m.nr >> m.nz)) {
			throw RasterError(RasterErrc::malformed_header, "raster: bad dims line in " + path);
		}
	}
	{
		std::istringstream s(header_line("origin"));
		if (!(s >> m.origin_r >> m.origin_z)) {
			throw RasterError(RasterErrc::malformed_header, "raster: bad origin line in " + path);
		}
	}
	{
		std::istringstream s(header_line("spacing"));
		if (!(s >> m.spacing_r >> m.spacing_z)) {
			throw RasterError(RasterErrc::malformed_header, "raster: bad spacing line in " + path);
		}
	}
	{
		std::istringstream s(header_line("params"));
		std::string name;
		while (s >> name) {
			m.names.push_back(name);
		}
	}
	validate_header(m);
	const std::size_t count = static_cast<std::size_t>(m.nr) * m.nz;
	for (std::size_t p = 0; p < m.names.size(); ++p) {
		std::vector<double> v(count);
		for (auto &x : v) {
			std::string tok;
			if (!(is >> tok)) {
				throw RasterError(RasterErrc::short_payload, "raster: payload shorter than declared in " + path);
			}
			try {
				x = std::stod(tok);
			} catch (const std::exception &) {
				throw RasterError(RasterErrc::malformed_header, "raster: bad value '" + tok + "' in " + path);
			}
		}
		m.values.push_back(std::move(v));
	}
	return m;
}

} // namespace detail

/// Reads either format, detected from the leading magic.
inline RasterModel read_raster(const std::string &path) {
	std::ifstream is(path, std::ios::binary);
	if (!is) {
		throw RasterError(RasterErrc::io_error, "raster: cannot open " + path);
	}
	char magic[8] = {};
	is.read(magic, 8);
	if (is.gcount() == 8 && std::memcmp(magic, detail::kRasterMagic, 8) == 0) {
		return detail::read_binary(is, path);
	}
	is.clear();
	is.seekg(0);
	std::string tag;
	int version = 0;
	if (!(is >> tag >> version) || tag != "LWRTEXT" || version != 1) {
		throw RasterError(RasterErrc::malformed_header, "raster: unrecognized header in " + path);
	}
	std::string rest;
	std::getline(is, rest);
	return detail::read_text(is, path);
}

inline void write_raster_binary(const std::string &path, const RasterModel &m) {
	detail::validate_header(m);
	if (m.values.size() != m.names.size()) {
		throw std::invalid_argument("write_raster: one value grid per parameter required");
	}
	std::ofstream os(path, std::ios::binary | std::ios::trunc);
	if (!os) {
		throw RasterError(RasterErrc::io_error, "raster: cannot write " + path);
	}
	os.write(detail::kRasterMagic, 8);
	detail::write_pod(os, detail::kRasterVersion);
	detail::write_pod(os, m.nr);
	detail::write_pod(os, m.nz);
	detail::write_pod(os, static_cast<std::uint32_t>(m.names.size()));
	detail::write_pod(os, m.origin_r);
	detail::write_pod(os, m.origin_z);
	detail::write_pod(os, m.spacing_r);
	detail::write_pod(os, m.spacing_z);
	for (const auto &n : m.names) {
		detail::write_pod(os, static_cast<std::uint32_t>(n.size()));
		os.write(n.data(), static_cast<std::streamsize>(n.size()));
	}
	const std::size_t count = static_cast<std::size_t>(m.nr) * m.nz;
	for (const auto &v : m.values) {
		if (v.size() != count) {
			throw std::invalid_argument("write_raster: value grid has wrong size");
		}
		os.write(reinterpret_cast<const char *>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
	}
	if (!os) {
		throw RasterError(RasterErrc::io_error, "raster: write failed for " + path);
	}
}

inline void write_raster_text(const std::string &path, const RasterModel &m) {
	detail::validate_header(m);
	std::ofstream os(path, std::ios::trunc);
	if (!os) {
		throw RasterError(RasterErrc::io_error, "raster: cannot write " + path);
	}
	char buf[64];
	auto num = [&](double x) {
		std::snprintf(buf, sizeof buf, "%.17g", x);
		return std::string(buf);
	};
	os << "LWRTEXT 1\n";
	os << "dims " << m.nr << ' ' << m.nz << '\n';
	os << "origin " << num(m.origin_r) << ' ' << num(m.origin_z) << '\n';
	os << "spacing " << num(m.spacing_r) << ' ' << num(m.spacing_z) << '\n';
	os << "params";
	for (const auto &n : m.names) {
		os << ' ' << n;
	}
	os << '\n';
	for (const auto &v : m.values) {
		for (std::size_t i = 0; i < v.size(); ++i) {
			os << num(v[i]) << ((i + 1) % m.nz == 0 ? '\n' : ' ');
		}
	}
}

/**
 * Reads a raster and checks that every parameter named in `required` exists
 * and is strictly positive everywhere.
 */
inline RasterModel load_raster_model(const std::string &path, const std::vector<std::string> &required) {
	auto m = read_raster(path);
	for (const auto &name : required) {
		const auto &v = m.values[m.param_index(name)];
		for (std::size_t j = 0; j < v.size(); ++j) {
			if (!(v[j] > 0.0) || !std::isfinite(v[j])) {
				throw RasterError(RasterErrc::nonpositive_value,
				                  "raster: parameter '" + name + "' is not positive at cell " +
				                      std::to_string(j / m.nz) + "," + std::to_string(j % m.nz) + " in " + path);
			}
		}
	}
	return m;
}

/// Names of the raster parameters holding each material quantity.
struct RasterMapping {
	std::string vp = "vp";
	std::string vs = "vs";
	std::string rho = "rho";
};

inline AcousticMedium acoustic_from_raster(const RasterModel &m, const RasterMapping &map = {}) {
	auto vp = m.field(map.vp);
	auto rho = m.field(map.rho);
	return {[vp, rho](double r, double z) {
		        const double c = vp(r, z);
		        return rho(r, z) * c * c;
	        },
	        rho};
}

inline ElasticMedium elastic_from_raster(const RasterModel &m, const RasterMapping &map = {}) {
	auto vp = m.field(map.vp);
	auto vs = m.field(map.vs);
	auto rho = m.field(map.rho);
	return {[vp, vs, rho](double r, double z) {
		        const double a = vp(r, z);
		        const double b = vs(r, z);
		        return rho(r, z) * (a * a - 2.0 * b * b);
	        },
	        [vs, rho](double r, double z) {
		        const double b = vs(r, z);
		        return rho(r, z) * b * b;
	        },
	        rho};
}

/// Packs grid fields into a raster aligned with the mesh nodes.
inline RasterModel snapshot_raster(const Grid2D &grid, const std::vector<std::string> &names,
                                   const std::vector<const Field2D *> &fields) {
	RasterModel m;
	m.nr = static_cast<std::uint32_t>(grid.nr);
	m.nz = static_cast<std::uint32_t>(grid.nz);
	m.origin_r = grid.r(0);
	m.origin_z = grid.z(0);
	m.spacing_r = grid.hr;
	m.spacing_z = grid.hz;
	m.names = names;
	for (const auto *f : fields) {
		m.values.push_back(f->data());
	}
	return m;
}

} // namespace lwave

#endif // LWAVE_RASTER_HPP
