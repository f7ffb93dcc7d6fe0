// SPDX-License-Identifier: Apache-2.0
//
// vabm - vision-assisted mmWave beam management co-simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "vabm/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vabm
{

double MaterialTable::amplitude(MaterialId m) const
{
    switch (m)
    {
    case MaterialId::metal:
        return metal;
    case MaterialId::concrete:
        return concrete;
    case MaterialId::brick:
        return brick;
    }
    return 0.0;
}

namespace
{
template <typename T>
const T *find_named(const std::vector<T> &items, std::string_view name)
{
    for (const auto &it : items)
        if (it.name == name)
            return &it;
    return nullptr;
}
} // namespace

const ArrayConfig *Scenario::find_array(std::string_view name) const { return find_named(arrays, name); }
const BsConfig *Scenario::find_bs(std::string_view name) const { return find_named(bss, name); }
const UeConfig *Scenario::find_ue(std::string_view name) const { return find_named(ues, name); }

ScenarioError::ScenarioError(const std::string &what, int line, int column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                                  : what),
      line_(line), column_(column)
{
}

bool is_active(const UeConfig &ue, int frame)
{
    if (!ue.active)
        return true;
    return std::any_of(ue.active->begin(), ue.active->end(), [frame](const FrameRange &r) { return r.contains(frame); });
}

// ---- Parsing -----------------------------------------------------------

namespace
{

enum class Section
{
    none,
    system,
    materials,
    array,
    bs,
    reflector,
    ue,
};

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Cursor over one value so that errors can point at a column.
struct Field
{
    std::string_view text;
    int line;
    int column; // 1-based column of text[0]

    [[noreturn]] void fail(const std::string &msg, std::size_t offset = 0) const
    {
        throw ScenarioError(msg, line, column + static_cast<int>(offset));
    }
};

double to_double(const Field &f, std::string_view tok, std::size_t offset)
{
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        f.fail("expected a number, got '" + std::string(tok) + "'", offset);
    return v;
}

int to_int(const Field &f, std::string_view tok, std::size_t offset)
{
    int v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        f.fail("expected an integer, got '" + std::string(tok) + "'", offset);
    return v;
}

double parse_number(const Field &f) { return to_double(f, f.text, 0); }
int parse_integer(const Field &f) { return to_int(f, f.text, 0); }

std::vector<std::pair<std::string_view, std::size_t>> split_commas(std::string_view s)
{
    std::vector<std::pair<std::string_view, std::size_t>> parts;
    std::size_t start = 0;
    while (true)
    {
        const auto comma = s.find(',', start);
        const auto piece = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        const auto lead = piece.find_first_not_of(" \t");
        parts.emplace_back(trim(piece), start + (lead == std::string_view::npos ? 0 : lead));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return parts;
}

Vec3 parse_vec3(const Field &f)
{
    const auto parts = split_commas(f.text);
    if (parts.size() != 3)
        f.fail("expected three comma-separated numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i)
        v[i] = to_double(f, parts[i].first, parts[i].second);
    return v;
}

Keyframe parse_keyframe(const Field &f)
{
    const auto colon = f.text.find(':');
    if (colon == std::string_view::npos)
        f.fail("keyframe must look like 'FRAME : X, Y, Z'");
    const auto frame_tok = trim(f.text.substr(0, colon));
    const auto rest = f.text.substr(colon + 1);
    const auto lead = rest.find_first_not_of(" \t");
    Field pos{trim(rest), f.line, f.column + static_cast<int>(colon + 1 + (lead == std::string_view::npos ? 0 : lead))};
    return Keyframe{to_int(f, frame_tok, 0), parse_vec3(pos)};
}

std::vector<FrameRange> parse_ranges(const Field &f)
{
    std::vector<FrameRange> out;
    if (f.text == "none")
        return out;
    for (const auto &[tok, off] : split_commas(f.text))
    {
        const auto dash = tok.find('-', 1);
        if (dash == std::string_view::npos)
        {
            const int v = to_int(f, tok, off);
            out.push_back({v, v});
        }
        else
        {
            out.push_back({to_int(f, trim(tok.substr(0, dash)), off), to_int(f, trim(tok.substr(dash + 1)), off + dash + 1)});
        }
    }
    return out;
}

struct Parser
{
    Scenario s;
    Section section = Section::none;
    bool seen_system = false;
    bool seen_materials = false;
    std::set<std::string> keys_in_section;
    std::map<std::string, int> section_line; // "kind name" -> header line, for duplicate detection

    static constexpr const char *repeatable[] = {"keyframe", "active"};

    void header(std::string_view inner, int line, int col)
    {
        inner = trim(inner);
        const auto sp = inner.find_first_of(" \t");
        const std::string kind(inner.substr(0, sp));
        const std::string name(sp == std::string_view::npos ? std::string_view{} : trim(inner.substr(sp)));
        keys_in_section.clear();

        auto need_name = [&]()
        {
            if (name.empty())
                throw ScenarioError("section [" + kind + "] requires a name", line, col);
            if (name.find_first_of(" \t") != std::string::npos)
                throw ScenarioError("section names may not contain whitespace", line, col);
            const std::string key = kind + " " + name;
            if (section_line.count(key))
                throw ScenarioError("duplicate " + kind + " name '" + name + "'", line, col);
            section_line[key] = line;
        };
        auto no_name = [&]()
        {
            if (!name.empty())
                throw ScenarioError("section [" + kind + "] takes no name", line, col);
        };

        if (kind == "system")
        {
            no_name();
            if (seen_system)
                throw ScenarioError("duplicate [system] section", line, col);
            seen_system = true;
            section = Section::system;
        }
        else if (kind == "materials")
        {
            no_name();
            if (seen_materials)
                throw ScenarioError("duplicate [materials] section", line, col);
            seen_materials = true;
            section = Section::materials;
        }
        else if (kind == "array")
        {
            need_name();
            section = Section::array;
            s.arrays.emplace_back().name = name;
        }
        else if (kind == "bs")
        {
            need_name();
            section = Section::bs;
            s.bss.emplace_back().name = name;
        }
        else if (kind == "reflector")
        {
            need_name();
            section = Section::reflector;
            s.reflectors.emplace_back().name = name;
        }
        else if (kind == "ue")
        {
            need_name();
            section = Section::ue;
            s.ues.emplace_back().name = name;
        }
        else
        {
            throw ScenarioError("unknown section '" + kind + "'", line, col);
        }
    }

    void pair(const std::string &key, const Field &v, int line, int key_col)
    {
        if (section == Section::none)
            throw ScenarioError("key '" + key + "' outside of any section", line, key_col);
        const bool repeats = std::find(std::begin(repeatable), std::end(repeatable), key) != std::end(repeatable);
        if (!repeats && !keys_in_section.insert(key).second)
            throw ScenarioError("duplicate key '" + key + "'", line, key_col);

        auto unknown = [&]() { throw ScenarioError("unknown key '" + key + "'", line, key_col); };

        switch (section)
        {
        case Section::system:
        {
            auto &p = s.system;
            if (key == "frames")
                p.frames = parse_integer(v);
            else if (key == "fps")
                p.fps = parse_number(v);
            else if (key == "carrier_ghz")
                p.carrier_ghz = parse_number(v);
            else if (key == "max_reflections")
                p.max_reflections = parse_integer(v);
            else if (key == "codebook_size")
                p.codebook_size = parse_integer(v);
            else if (key == "tx_power_dbm")
                p.tx_power_dbm = parse_number(v);
            else if (key == "noise_power_dbm")
                p.noise_power_dbm = parse_number(v);
            else
                unknown();
            break;
        }
        case Section::materials:
        {
            auto m = material_from_string(key);
            if (!m)
                throw ScenarioError("unknown material '" + key + "'", line, key_col);
            const double amp = parse_number(v);
            switch (*m)
            {
            case MaterialId::metal:
                s.materials.metal = amp;
                break;
            case MaterialId::concrete:
                s.materials.concrete = amp;
                break;
            case MaterialId::brick:
                s.materials.brick = amp;
                break;
            }
            break;
        }
        case Section::array:
        {
            auto &a = s.arrays.back();
            if (key == "elements")
                a.elements = parse_integer(v);
            else if (key == "spacing_wavelengths")
                a.spacing_wavelengths = parse_number(v);
            else
                unknown();
            break;
        }
        case Section::bs:
        {
            auto &b = s.bss.back();
            if (key == "position")
                b.position = parse_vec3(v);
            else if (key == "boresight_deg")
                b.boresight_deg = parse_number(v);
            else if (key == "array")
                b.array = std::string(v.text);
            else if (key == "camera_width")
                b.camera.width_px = parse_integer(v);
            else if (key == "camera_height")
                b.camera.height_px = parse_integer(v);
            else if (key == "camera_hfov_deg")
                b.camera.hfov_deg = parse_number(v);
            else if (key == "camera_offset")
                b.camera.offset = parse_vec3(v);
            else if (key == "camera_yaw_deg")
                b.camera.yaw_deg = parse_number(v);
            else if (key == "camera_pitch_deg")
                b.camera.pitch_deg = parse_number(v);
            else
                unknown();
            break;
        }
        case Section::reflector:
        {
            auto &r = s.reflectors.back();
            if (key == "shape")
                r.shape = std::string(v.text);
            else if (key == "center")
                r.center = parse_vec3(v);
            else if (key == "size")
                r.size = parse_vec3(v);
            else if (key == "yaw_deg")
                r.yaw_deg = parse_number(v);
            else if (key == "material")
                r.material = std::string(v.text);
            else if (key == "mesh")
                r.mesh_path = std::string(v.text);
            else
                unknown();
            break;
        }
        case Section::ue:
        {
            auto &u = s.ues.back();
            if (key == "size")
                u.size = parse_vec3(v);
            else if (key == "material")
                u.material = std::string(v.text);
            else if (key == "array")
                u.array = std::string(v.text);
            else if (key == "keyframe")
                u.keyframes.push_back(parse_keyframe(v));
            else if (key == "active")
            {
                auto ranges = parse_ranges(v);
                if (!u.active)
                    u.active.emplace();
                u.active->insert(u.active->end(), ranges.begin(), ranges.end());
            }
            else
                unknown();
            break;
        }
        case Section::none:
            break;
        }
    }
};

template <typename T>
void sort_by_name(std::vector<T> &v)
{
    std::stable_sort(v.begin(), v.end(), [](const T &a, const T &b) { return a.name < b.name; });
}

} // namespace

Scenario parse_scenario(std::string_view text)
{
    Parser p;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        const auto first = raw.find_first_not_of(" \t\r");
        if (first == std::string_view::npos)
            continue;
        const int col = static_cast<int>(first) + 1;
        const auto content = trim(raw);

        if (content.front() == '[')
        {
            if (content.back() != ']')
                throw ScenarioError("section header is missing ']'", line_no, col + static_cast<int>(content.size()));
            p.header(content.substr(1, content.size() - 2), line_no, col);
            continue;
        }

        const auto eq = raw.find('=');
        if (eq == std::string_view::npos)
            throw ScenarioError("expected 'key = value'", line_no, col);
        const auto key = trim(raw.substr(0, eq));
        if (key.empty())
            throw ScenarioError("missing key before '='", line_no, static_cast<int>(eq) + 1);
        const auto after = raw.substr(eq + 1);
        const auto vlead = after.find_first_not_of(" \t");
        const auto value = trim(after);
        if (value.empty())
            throw ScenarioError("missing value for key '" + std::string(key) + "'", line_no, static_cast<int>(eq) + 2);
        const Field field{value, line_no, static_cast<int>(eq + 2 + (vlead == std::string_view::npos ? 0 : vlead))};
        p.pair(std::string(key), field, line_no, col);
    }

    if (!p.seen_system)
        throw ScenarioError("missing [system] section");

    Scenario s = std::move(p.s);
    sort_by_name(s.arrays);
    sort_by_name(s.bss);
    sort_by_name(s.reflectors);
    sort_by_name(s.ues);

    const auto violations = validate_scenario(s);
    if (!violations.empty())
    {
        std::string msg = "invalid scenario: " + violations.front();
        for (std::size_t i = 1; i < violations.size(); ++i)
            msg += "; " + violations[i];
        throw ScenarioError(msg);
    }
    return s;
}

Scenario load_scenario_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("Cannot open scenario file '" + path + "'.");
    std::ostringstream ss;
    ss << in.rdbuf();
    try
    {
        return parse_scenario(ss.str());
    }
    catch (const ScenarioError &e)
    {
        throw ScenarioError(path + ": " + e.what());
    }
}

// ---- Validation --------------------------------------------------------

std::vector<std::string> validate_scenario(const Scenario &s)
{
    std::vector<std::string> out;
    auto bad = [&out](std::string msg) { out.push_back(std::move(msg)); };
    const auto &sys = s.system;

    if (sys.frames < 1)
        bad("system: frames must be >= 1");
    if (!(sys.fps > 0.0))
        bad("system: fps must be > 0");
    if (!(sys.carrier_ghz > 0.0))
        bad("system: carrier_ghz must be > 0");
    if (sys.max_reflections < 0)
        bad("system: max_reflections must be >= 0");
    if (sys.codebook_size < 1)
        bad("system: codebook_size must be >= 1");
    if (!(sys.noise_power_dbm < sys.tx_power_dbm))
        bad("system: noise_power_dbm must be below tx_power_dbm");

    for (MaterialId m : {MaterialId::metal, MaterialId::concrete, MaterialId::brick})
    {
        const double a = s.materials.amplitude(m);
        if (!(a > 0.0 && a <= 1.0))
            bad("materials: " + std::string(to_string(m)) + " reflection amplitude must be in (0, 1]");
    }

    auto check_duplicates = [&](const auto &items, const char *kind)
    {
        std::set<std::string> seen;
        for (const auto &it : items)
            if (!seen.insert(it.name).second)
                bad(std::string("duplicate ") + kind + " name '" + it.name + "'");
    };
    check_duplicates(s.arrays, "array");
    check_duplicates(s.bss, "bs");
    check_duplicates(s.reflectors, "reflector");
    check_duplicates(s.ues, "ue");

    auto check_material = [&](const std::string &m)
    {
        if (!material_from_string(m))
            bad(m.empty() ? std::string("missing material") : "unknown material '" + m + "'");
    };
    auto positive = [](const Vec3 &v) { return v.allFinite() && (v.array() > 0.0).all(); };

    for (const auto &a : s.arrays)
    {
        if (a.elements < 1)
            bad("array '" + a.name + "': elements must be >= 1");
        if (!(a.spacing_wavelengths > 0.0))
            bad("array '" + a.name + "': spacing_wavelengths must be > 0");
    }

    if (s.bss.empty())
        bad("scenario needs at least one [bs]");
    for (const auto &b : s.bss)
    {
        if (!s.find_array(b.array))
            bad("bs '" + b.name + "': unknown array '" + b.array + "'");
        if (!b.position.allFinite())
            bad("bs '" + b.name + "': position must be finite");
        if (!(b.boresight_deg >= 0.0 && b.boresight_deg < 360.0))
            bad("bs '" + b.name + "': boresight_deg must be in [0, 360)");
        const auto &c = b.camera;
        if (c.width_px < 1 || c.height_px < 1)
            bad("bs '" + b.name + "': camera resolution must be at least 1x1");
        if (!(c.hfov_deg > 0.0 && c.hfov_deg < 180.0))
            bad("bs '" + b.name + "': camera_hfov_deg must be in (0, 180)");
        if (!c.offset.allFinite())
            bad("bs '" + b.name + "': camera_offset must be finite");
    }

    for (const auto &r : s.reflectors)
    {
        if (r.shape != "box")
            bad("reflector '" + r.name + "': unsupported shape '" + r.shape + "'");
        if (!positive(r.size))
            bad("reflector '" + r.name + "': size components must be > 0");
        if (!r.center.allFinite())
            bad("reflector '" + r.name + "': center must be finite");
        check_material(r.material);
    }

    if (s.ues.empty())
        bad("scenario needs at least one [ue]");
    for (const auto &u : s.ues)
    {
        if (!positive(u.size))
            bad("ue '" + u.name + "': size components must be > 0");
        check_material(u.material);
        if (u.array && !s.find_array(*u.array))
            bad("ue '" + u.name + "': unknown array '" + *u.array + "'");
        if (u.keyframes.empty())
            bad("ue '" + u.name + "': needs at least one keyframe");
        for (std::size_t k = 0; k < u.keyframes.size(); ++k)
        {
            const auto &kf = u.keyframes[k];
            if (kf.frame < 0 || kf.frame >= sys.frames)
                bad("ue '" + u.name + "': keyframe frame out of range (" + std::to_string(kf.frame) + " not in [0, " +
                    std::to_string(sys.frames) + "))");
            if (k > 0 && kf.frame <= u.keyframes[k - 1].frame)
                bad("ue '" + u.name + "': keyframe frames must be strictly increasing");
            if (!kf.position.allFinite())
                bad("ue '" + u.name + "': keyframe position must be finite");
        }
        if (u.active)
            for (const auto &r : *u.active)
                if (r.first < 0 || r.last >= sys.frames || r.first > r.last)
                    bad("ue '" + u.name + "': active range " + std::to_string(r.first) + "-" + std::to_string(r.last) +
                        " outside [0, " + std::to_string(sys.frames) + ")");
    }
    return out;
}

// ---- Serialization -----------------------------------------------------

namespace
{
std::string num(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string vec(const Vec3 &v) { return num(v.x()) + ", " + num(v.y()) + ", " + num(v.z()); }
} // namespace

std::string serialize_scenario(const Scenario &s)
{
    std::ostringstream o;
    const auto &p = s.system;
    o << "[system]\n"
      << "frames = " << p.frames << "\n"
      << "fps = " << num(p.fps) << "\n"
      << "carrier_ghz = " << num(p.carrier_ghz) << "\n"
      << "max_reflections = " << p.max_reflections << "\n"
      << "codebook_size = " << p.codebook_size << "\n"
      << "tx_power_dbm = " << num(p.tx_power_dbm) << "\n"
      << "noise_power_dbm = " << num(p.noise_power_dbm) << "\n";

    o << "\n[materials]\n"
      << "metal = " << num(s.materials.metal) << "\n"
      << "concrete = " << num(s.materials.concrete) << "\n"
      << "brick = " << num(s.materials.brick) << "\n";

    for (const auto &a : s.arrays)
        o << "\n[array " << a.name << "]\n"
          << "elements = " << a.elements << "\n"
          << "spacing_wavelengths = " << num(a.spacing_wavelengths) << "\n";

    for (const auto &b : s.bss)
    {
        const auto &c = b.camera;
        o << "\n[bs " << b.name << "]\n"
          << "position = " << vec(b.position) << "\n"
          << "boresight_deg = " << num(b.boresight_deg) << "\n"
          << "array = " << b.array << "\n"
          << "camera_width = " << c.width_px << "\n"
          << "camera_height = " << c.height_px << "\n"
          << "camera_hfov_deg = " << num(c.hfov_deg) << "\n"
          << "camera_offset = " << vec(c.offset) << "\n"
          << "camera_yaw_deg = " << num(c.yaw_deg) << "\n"
          << "camera_pitch_deg = " << num(c.pitch_deg) << "\n";
    }

    for (const auto &r : s.reflectors)
    {
        o << "\n[reflector " << r.name << "]\n"
          << "shape = " << r.shape << "\n"
          << "center = " << vec(r.center) << "\n"
          << "size = " << vec(r.size) << "\n"
          << "yaw_deg = " << num(r.yaw_deg) << "\n"
          << "material = " << r.material << "\n";
        if (r.mesh_path)
            o << "mesh = " << *r.mesh_path << "\n";
    }

    for (const auto &u : s.ues)
    {
        o << "\n[ue " << u.name << "]\n"
          << "size = " << vec(u.size) << "\n"
          << "material = " << u.material << "\n";
        if (u.array)
            o << "array = " << *u.array << "\n";
        if (u.active)
        {
            if (u.active->empty())
                o << "active = none\n";
            for (const auto &r : *u.active)
                o << "active = " << r.first << "-" << r.last << "\n";
        }
        for (const auto &k : u.keyframes)
            o << "keyframe = " << k.frame << " : " << vec(k.position) << "\n";
    }
    return o.str();
}

} // namespace vabm
