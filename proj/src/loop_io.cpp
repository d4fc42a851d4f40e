#include "knotfield/error.hpp"
#include "knotfield/loop.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace knotfield {

Loop read_loop(std::istream& in) {
    std::vector<Vec3> vertices;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        double x, y, z;
        if (!(fields >> x)) continue; // blank or comment-only
        if (!(fields >> y >> z)) {
            throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 'x y z'");
        }
        std::string extra;
        if (fields >> extra) {
            throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": trailing text '" + extra + "'");
        }
        vertices.emplace_back(x, y, z);
    }
    return Loop(std::move(vertices));
}

Loop read_loop_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open loop file " + path);
    return read_loop(in);
}

void write_loop(std::ostream& out, const Loop& loop) {
    char buf[128];
    for (const auto& v : loop.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
}

} // namespace knotfield
