#pragma once

#include "shrinker/mesh.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace shrinker {

// OBJ geometry with %.17g vertices: text round trip is bit exact.

inline std::string to_obj(const std::vector<Vec3>& verts, const TriList& tris) {
    std::string out;
    out.reserve(verts.size() * 64 + tris.size() * 24);
    char line[128];
    for (const auto& v : verts) {
        std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out += line;
    }
    for (const auto& t : tris) {
        std::snprintf(line, sizeof(line), "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
        out += line;
    }
    return out;
}

inline void write_obj(const std::string& path, const std::vector<Vec3>& verts,
                      const TriList& tris) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_obj: cannot open " + path);
    f << to_obj(verts, tris);
}

inline void write_obj(const std::string& path, const EmbeddedMesh& m) {
    write_obj(path, m.verts, m.tris);
}

inline void read_obj(const std::string& path, std::vector<Vec3>& verts, TriList& tris) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_obj: cannot open " + path);
    verts.clear();
    tris.clear();
    std::string line;
    while (std::getline(f, line)) {
        if (line.rfind("v ", 0) == 0) {
            double x, y, z;
            if (std::sscanf(line.c_str(), "v %lf %lf %lf", &x, &y, &z) != 3)
                throw std::runtime_error("read_obj: malformed vertex line");
            verts.emplace_back(x, y, z);
        } else if (line.rfind("f ", 0) == 0) {
            int a, b, c;
            if (std::sscanf(line.c_str(), "f %d %d %d", &a, &b, &c) != 3)
                throw std::runtime_error("read_obj: malformed face line");
            tris.push_back({a - 1, b - 1, c - 1});
        }
    }
}

// Sidecar with boundary tags and symmetry permutations; together with the OBJ
// this reconstructs a Mesh exactly.
inline nlohmann::json mesh_sidecar(const Mesh& mesh) {
    nlohmann::json j;
    j["phi0"] = mesh.phi0;
    j["refinement"] = mesh.refinement;
    j["boundary_tags"] = mesh.tag;
    j["sym_xz"] = {{"perm", mesh.sym_xz.perm}, {"sign", mesh.sym_xz.sign}};
    j["sym_yz"] = {{"perm", mesh.sym_yz.perm}, {"sign", mesh.sym_yz.sign}};
    return j;
}

inline void write_mesh(const std::string& obj_path, const std::string& sidecar_path,
                       const Mesh& mesh) {
    write_obj(obj_path, mesh.nodes, mesh.tris);
    std::ofstream f(sidecar_path, std::ios::binary);
    if (!f) throw std::runtime_error("write_mesh: cannot open " + sidecar_path);
    f << mesh_sidecar(mesh).dump(2) << "\n";
}

inline Mesh read_mesh(const std::string& obj_path, const std::string& sidecar_path) {
    Mesh mesh;
    read_obj(obj_path, mesh.nodes, mesh.tris);
    std::ifstream f(sidecar_path);
    if (!f) throw std::runtime_error("read_mesh: cannot open " + sidecar_path);
    nlohmann::json j = nlohmann::json::parse(f);
    mesh.phi0 = j.at("phi0").get<double>();
    mesh.refinement = j.at("refinement").get<int>();
    mesh.tag = j.at("boundary_tags").get<std::vector<int>>();
    mesh.sym_xz.perm = j.at("sym_xz").at("perm").get<std::vector<int>>();
    mesh.sym_xz.sign = j.at("sym_xz").at("sign").get<double>();
    mesh.sym_yz.perm = j.at("sym_yz").at("perm").get<std::vector<int>>();
    mesh.sym_yz.sign = j.at("sym_yz").at("sign").get<double>();
    return mesh;
}

// Binary little-endian PLY, float32 vertices, for standard viewers.
inline void write_ply(const std::string& path, const std::vector<Vec3>& verts,
                      const TriList& tris) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_ply: cannot open " + path);
    std::ostringstream head;
    head << "ply\nformat binary_little_endian 1.0\n"
         << "element vertex " << verts.size() << "\n"
         << "property float x\nproperty float y\nproperty float z\n"
         << "element face " << tris.size() << "\n"
         << "property list uchar int vertex_indices\nend_header\n";
    f << head.str();
    for (const auto& v : verts) {
        float xyz[3] = {static_cast<float>(v.x()), static_cast<float>(v.y()),
                        static_cast<float>(v.z())};
        f.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    }
    for (const auto& t : tris) {
        std::uint8_t n = 3;
        std::int32_t idx[3] = {t[0], t[1], t[2]};
        f.write(reinterpret_cast<const char*>(&n), 1);
        f.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
}

inline void write_ply(const std::string& path, const EmbeddedMesh& m) {
    write_ply(path, m.verts, m.tris);
}

}  // namespace shrinker
