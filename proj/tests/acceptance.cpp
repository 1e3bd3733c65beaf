#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "roughhedge/checks.hpp"

// One PASS/FAIL line per acceptance criterion. Exit status is 0 unless
// --strict is given and a criterion failed.
int main(int argc, char** argv) {
    rh::CheckOptions o;
    bool strict = false;
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--strict")) strict = true;
        else if (!std::strcmp(argv[i], "--quick")) o.scale = rh::CheckScale::quick;
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--strict] [--quick] [--only N]\n", argv[0]);
            return 1;
        }
    }
    int failed = 0;
    for (int id = 1; id <= rh::n_criteria; ++id) {
        if (only && id != only) continue;
        const rh::CheckResult r = rh::run_check(id, o);
        failed += !r.passed;
        std::printf("%s %d %s: %s; runtime %.1f s (%s %.0f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str(), r.seconds, r.within_budget ? "<" : "FAILED <", r.budget);
        std::fflush(stdout);
    }
    return strict && failed ? 3 : 0;
}
