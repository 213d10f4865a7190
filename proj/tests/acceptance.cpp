// Acceptance run: one PASS/FAIL line per criterion, followed by its checks.
//
// Usage: acceptance [--known-failures 4,7] [criterion ids...]
// Exit status is 0 when every selected criterion passes, or when the set of
// failing criteria equals the --known-failures list exactly.
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>

#include "certify.hpp"

int main(int argc, char** argv)
{
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    std::set<int> known, selected;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--known-failures" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) known.insert(std::stoi(tok));
        } else {
            selected.insert(std::stoi(a));
        }
    }
    if (selected.empty())
        for (int id = 1; id <= tf::kCriterionCount; ++id) selected.insert(id);

    tf::CertifyOptions opt;
    std::set<int> failed;
    for (int id : selected) {
        const tf::CriterionResult r = tf::certify_criterion(id, opt);
        const bool in_time = r.seconds <= r.budget_seconds;
        const bool ok = r.pass() && in_time;
        if (!ok) failed.insert(id);
        int n_pass = 0;
        for (const auto& c : r.checks) n_pass += c.pass;
        std::printf("criterion %2d %s  %-40s %d/%zu checks, %.1f s of %.0f s%s\n", id, ok ? "PASS" : "FAIL",
                    r.title.c_str(), n_pass, r.checks.size(), r.seconds, r.budget_seconds,
                    in_time ? "" : " (over budget)");
        for (const auto& c : r.checks)
            std::printf("    %-4s %-42s %.6g %s %.6g  %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.metric,
                        c.rule.c_str(), c.tolerance, c.detail.c_str());
    }
    if (failed.empty()) return 0;
    if (!known.empty() && failed == known) {
        std::printf("failing criteria match the documented known failures\n");
        return 0;
    }
    return 1;
}
