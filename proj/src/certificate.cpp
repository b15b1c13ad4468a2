#include "jumpreach/certificate.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace jumpreach {

int truncation_index_for(const std::vector<Vec>& marks, const std::vector<double>& mark_radii) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < marks.size(); ++i)
        gap = std::min(gap, norm(marks[i]) - mark_radii[i]);
    if (!(gap > 0.0)) throw std::invalid_argument("mark balls must stay away from the origin");
    if (gap > 1.0) return 1;
    int m = static_cast<int>(std::floor(1.0 / gap)) + 1;
    while (1.0 / m >= gap) ++m;  // float-boundary repair
    return m;
}

StructuralCheck check_certificate_structure(const JumpChainCertificate& cert,
                                            const ModelSpec& model,
                                            const IntensityMeasure& measure) {
    StructuralCheck out;
    const std::size_t n = cert.marks.size();
    if (cert.states.size() != n + 1 || cert.mark_radii.size() != n ||
        cert.state_radii.size() != n + 1) {
        out.failure = "inconsistent field lengths";
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec step = model.jump_coeff(cert.states[i], cert.marks[i]);
        for (std::size_t c = 0; c < step.size(); ++c) {
            if (cert.states[i + 1][c] != cert.states[i][c] + step[c]) {
                out.failure = "chain consistency: q_{i+1} != q_i + sigma(q_i, l_{i+1})";
                return out;
            }
        }
    }
    for (std::size_t i = 0; i + 1 <= n; ++i) {
        if (!(cert.state_radii[i] > 0.0) || cert.state_radii[i] > cert.state_radii[i + 1]) {
            out.failure = "state radii must be positive and non-decreasing";
            return out;
        }
    }
    if (!(cert.state_radii[n] > 0.0)) {
        out.failure = "state radii must be positive and non-decreasing";
        return out;
    }
    if (dist(cert.states[n], cert.target_center) + cert.state_radii[n] > cert.target_radius) {
        out.failure = "terminal ball escapes the target ball";
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(cert.mark_radii[i] > 0.0)) {
            out.failure = "mark radii must be positive";
            return out;
        }
        if (!(norm(cert.marks[i]) - cert.mark_radii[i] > 1.0 / cert.m0)) {
            out.failure = "a mark ball leaves the certified annulus";
            return out;
        }
        if (!(measure.mass_in_ball(cert.marks[i], cert.mark_radii[i]) > 0.0)) {
            out.failure = "a mark ball carries no intensity mass";
            return out;
        }
    }
    out.pass = true;
    return out;
}

std::string certificate_to_json(const JumpChainCertificate& cert) {
    nlohmann::ordered_json j;
    j["states"] = cert.states;
    j["marks"] = cert.marks;
    j["mark_radii"] = cert.mark_radii;
    j["state_radii"] = cert.state_radii;
    j["m0"] = cert.m0;
    j["target_center"] = cert.target_center;
    j["target_radius"] = cert.target_radius;
    return j.dump(2);
}

JumpChainCertificate certificate_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    JumpChainCertificate cert;
    cert.states = j.at("states").get<std::vector<Vec>>();
    cert.marks = j.at("marks").get<std::vector<Vec>>();
    cert.mark_radii = j.at("mark_radii").get<std::vector<double>>();
    cert.state_radii = j.at("state_radii").get<std::vector<double>>();
    cert.m0 = j.at("m0").get<int>();
    cert.target_center = j.at("target_center").get<Vec>();
    cert.target_radius = j.at("target_radius").get<double>();
    return cert;
}

std::string certificate_table(const JumpChainCertificate& cert) {
    std::ostringstream os;
    auto vec = [](const Vec& v) {
        std::ostringstream s;
        s << "(";
        for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
        s << ")";
        return s.str();
    };
    os << "step  q_i  l_i  eps_i  eta_i  dist_to_target\n";
    for (std::size_t i = 0; i < cert.states.size(); ++i) {
        os << i << "  " << vec(cert.states[i]) << "  ";
        if (i > 0)
            os << vec(cert.marks[i - 1]) << "  " << cert.mark_radii[i - 1] << "  ";
        else
            os << "-  -  ";
        os << cert.state_radii[i] << "  " << dist(cert.states[i], cert.target_center) << "\n";
    }
    os << "m0 = " << cert.m0 << ", target ball (" << vec(cert.target_center) << ", "
       << cert.target_radius << ")\n";
    return os.str();
}

}  // namespace jumpreach
