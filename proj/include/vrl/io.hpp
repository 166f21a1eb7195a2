// History directory serialization (frames.bin, moments.bin, scalars.csv,
// manifest.json) and the radiation-report JSON/CSV writers. All numeric text
// goes through format_double so repeated runs are byte-identical.
#ifndef VRL_IO_HPP
#define VRL_IO_HPP

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "vrl/history.hpp"
#include "vrl/radiation.hpp"
#include "vrl/solver.hpp"

namespace vrl {

namespace iodetail {

inline void write_f32(std::ostream& os, const std::vector<double>& v) {
    std::vector<float> f(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = static_cast<float>(v[i]);
    os.write(reinterpret_cast<const char*>(f.data()),
             static_cast<std::streamsize>(f.size() * sizeof(float)));
}

inline void skip_f32(std::istream& is, std::size_t n) {
    is.seekg(static_cast<std::streamoff>(n * sizeof(float)), std::ios::cur);
}

} // namespace iodetail

inline std::string scalars_csv_header() { return "t,Dx,Dy,Dz,DDx,DDy,DDz,Ekin,Epot"; }

// Writes frames.bin (snapshots), moments.bin (f32 grid export), scalars.csv.
// The reload path reconstructs grids from the snapshots in double precision,
// so moments.bin is an export artifact, not the pipeline input.
inline void save_history(const std::filesystem::path& dir, const SourceHistory& h,
                         bool with_field_grids = false) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "frames.bin", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / "frames.bin").string());
        f.write("VRLH", 4);
        const std::uint32_t version = 1;
        const std::uint64_t count = h.frames.size();
        f.write(reinterpret_cast<const char*>(&version), 4);
        f.write(reinterpret_cast<const char*>(&count), 8);
        for (const auto& fr : h.frames) write_snapshot(f, fr.snapshot);
    }
    {
        std::ofstream f(dir / "moments.bin", std::ios::binary);
        f.write("VRLM", 4);
        const std::uint32_t version = 1;
        f.write(reinterpret_cast<const char*>(&version), 4);
        const UniformGrid& g = h.grid;
        f.write(reinterpret_cast<const char*>(&g.origin), sizeof(Vec3));
        f.write(reinterpret_cast<const char*>(&g.h), 8);
        f.write(reinterpret_cast<const char*>(&g.nx), 4);
        f.write(reinterpret_cast<const char*>(&g.ny), 4);
        f.write(reinterpret_cast<const char*>(&g.nz), 4);
        const std::uint64_t count = h.frames.size();
        f.write(reinterpret_cast<const char*>(&count), 8);
        for (const auto& fr : h.frames) {
            f.write(reinterpret_cast<const char*>(&fr.time), 8);
            iodetail::write_f32(f, fr.rho.v);
            iodetail::write_f32(f, fr.current.vx);
            iodetail::write_f32(f, fr.current.vy);
            iodetail::write_f32(f, fr.current.vz);
            iodetail::write_f32(f, fr.rho2.v);
            const std::uint8_t has_field = (with_field_grids || fr.has_field_grid) ? 1 : 0;
            f.write(reinterpret_cast<const char*>(&has_field), 1);
            if (has_field) {
                iodetail::write_f32(f, fr.field.vx);
                iodetail::write_f32(f, fr.field.vy);
                iodetail::write_f32(f, fr.field.vz);
            }
        }
    }
    {
        std::ofstream f(dir / "scalars.csv");
        f << scalars_csv_header() << "\n";
        for (const auto& fr : h.frames) {
            f << format_double(fr.time) << "," << format_double(fr.dipole.x) << ","
              << format_double(fr.dipole.y) << "," << format_double(fr.dipole.z) << ","
              << format_double(fr.dipole_accel.x) << "," << format_double(fr.dipole_accel.y) << ","
              << format_double(fr.dipole_accel.z) << "," << format_double(fr.energy.kinetic) << ","
              << format_double(fr.energy.potential) << "\n";
        }
    }
    {
        nlohmann::json j;
        j["mode"] = h.mode == FieldMode::plasma ? "plasma" : "gravity";
        j["dt_record"] = h.dt_record;
        j["dt_step"] = h.dt_step;
        j["softening"] = h.softening;
        j["bandwidth"] = h.bandwidth;
        j["grid"] = {{"origin", {h.grid.origin.x, h.grid.origin.y, h.grid.origin.z}},
                     {"h", h.grid.h},
                     {"nx", h.grid.nx},
                     {"ny", h.grid.ny},
                     {"nz", h.grid.nz}};
        j["frames"] = h.frames.size();
        std::ofstream f(dir / "manifest.json");
        f << j.dump(2) << "\n";
    }
}

// Reloads a history: snapshots from frames.bin, scalars from scalars.csv,
// grids re-deposited in double precision (bit-identical to the original run).
inline SourceHistory load_history(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw std::runtime_error("missing " + (dir / "manifest.json").string());
    nlohmann::json j;
    mf >> j;

    SourceHistory h;
    h.mode = j["mode"] == "plasma" ? FieldMode::plasma : FieldMode::gravity;
    h.dt_record = j["dt_record"];
    h.dt_step = j["dt_step"];
    h.softening = j["softening"];
    h.bandwidth = j["bandwidth"];
    h.grid.origin = {j["grid"]["origin"][0], j["grid"]["origin"][1], j["grid"]["origin"][2]};
    h.grid.h = j["grid"]["h"];
    h.grid.nx = j["grid"]["nx"];
    h.grid.ny = j["grid"]["ny"];
    h.grid.nz = j["grid"]["nz"];

    std::ifstream fb(dir / "frames.bin", std::ios::binary);
    if (!fb) throw std::runtime_error("missing " + (dir / "frames.bin").string());
    char magic[4];
    fb.read(magic, 4);
    if (std::memcmp(magic, "VRLH", 4) != 0) throw std::runtime_error("frames.bin: bad magic");
    std::uint32_t version = 0;
    std::uint64_t count = 0;
    fb.read(reinterpret_cast<char*>(&version), 4);
    fb.read(reinterpret_cast<char*>(&count), 8);
    h.frames.resize(count);
    for (auto& fr : h.frames) {
        fr.snapshot = read_snapshot(fb);
        fr.time = fr.snapshot.time;
        fr.rho = deposit_charge(fr.snapshot, h.grid, h.bandwidth);
        fr.current = deposit_current(fr.snapshot, h.grid, h.bandwidth);
        fr.rho_dt = minus_div_current(fr.current);
        ScalarField r2(h.grid, MomentKind::charge);
        deposit_scalar(fr.snapshot, r2, h.bandwidth,
                       [&](std::size_t i) { return fr.snapshot.w[i] * norm2(fr.snapshot.mom(i)); });
        fr.rho2 = std::move(r2);
        VectorField j2(h.grid, MomentKind::current);
        deposit_vector(fr.snapshot, j2, h.bandwidth, [&](std::size_t i) {
            return (fr.snapshot.w[i] * norm2(fr.snapshot.mom(i))) * fr.snapshot.mom(i);
        });
        fr.rho2_dt = minus_div_current(j2);
        // the power-density part of rho2_dt needs accelerations
        std::vector<double> ax, ay, az;
        accelerations(fr.snapshot, h.mode, h.softening, ax, ay, az);
        ScalarField pw(h.grid, MomentKind::charge);
        deposit_scalar(fr.snapshot, pw, h.bandwidth, [&](std::size_t i) {
            return 2.0 * fr.snapshot.w[i] * dot(fr.snapshot.mom(i), Vec3{ax[i], ay[i], az[i]});
        });
        for (std::size_t m = 0; m < fr.rho2_dt.v.size(); ++m) fr.rho2_dt.v[m] += pw.v[m];
        fr.dipole = dipole_moment(fr.snapshot);
    }

    // scalars from the CSV (exact %.17g round trip)
    std::ifstream sc(dir / "scalars.csv");
    if (!sc) throw std::runtime_error("missing " + (dir / "scalars.csv").string());
    std::string line;
    std::getline(sc, line); // header
    for (auto& fr : h.frames) {
        if (!std::getline(sc, line)) throw std::runtime_error("scalars.csv: too few rows");
        std::vector<double> vals;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            const std::string tok =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            vals.push_back(std::stod(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (vals.size() != 9) throw std::runtime_error("scalars.csv: bad row");
        fr.dipole = {vals[1], vals[2], vals[3]};
        fr.dipole_accel = {vals[4], vals[5], vals[6]};
        fr.energy.time = vals[0];
        fr.energy.kinetic = vals[7];
        fr.energy.potential = vals[8];
    }
    return h;
}

// ---------------------------------------------------------------------------
// Radiation report serialization: report.json and the flat scan.csv
// (c,r,u,measured,predicted,residual).
// ---------------------------------------------------------------------------

inline std::string scan_csv_header() { return "c,r,u,measured,predicted,residual"; }

inline void save_report(const std::filesystem::path& dir, const RadiationReport& rep) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "scan.csv");
        f << scan_csv_header() << "\n";
        for (const auto& p : rep.points) {
            f << format_double(p.c) << "," << format_double(p.r) << "," << format_double(p.u)
              << "," << format_double(p.measured) << "," << format_double(p.predicted) << ","
              << format_double(p.residual) << "\n";
        }
    }
    {
        nlohmann::json j;
        j["scenario"] = rep.scenario;
        j["mode"] = rep.mode == FieldMode::plasma ? "plasma" : "gravity";
        j["fits_skipped_static"] = rep.fits_skipped_static;
        auto pts = nlohmann::json::array();
        for (const auto& p : rep.points) {
            nlohmann::json q = {{"c", p.c},
                                {"r", p.r},
                                {"u", p.u},
                                {"x_bar", {p.x_bar.x, p.x_bar.y, p.x_bar.z}},
                                {"measured", p.measured},
                                {"predicted", p.predicted},
                                {"residual", p.residual}};
            if (p.has_exact) {
                q["measured_exact"] = p.measured_exact;
                q["residual_exact"] = p.residual_exact;
            }
            pts.push_back(q);
        }
        j["points"] = pts;
        auto fits = nlohmann::json::array();
        for (const auto& f2 : rep.fits) {
            fits.push_back({{"name", f2.name},
                            {"exponent", f2.exponent},
                            {"fit_residual", f2.fit_residual},
                            {"points", f2.points},
                            {"valid", f2.valid},
                            {"note", f2.note}});
        }
        j["fits"] = fits;
        std::ofstream f(dir / "report.json");
        f << j.dump(2) << "\n";
    }
}

} // namespace vrl

#endif // VRL_IO_HPP
