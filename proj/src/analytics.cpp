/*
 * Copyright 2026 The tapesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tapesim/analytics.hpp"

#include <cmath>

namespace tapesim {

void check_stable(const QueueModelParams& p, const std::string& name) {
    if (p.servers < 1) throw std::invalid_argument(name + ": server count must be positive");
    if (!(p.mu > 0.0)) throw std::invalid_argument(name + ": service rate must be positive");
    if (p.lambda < 0.0) throw std::invalid_argument(name + ": arrival rate must be nonnegative");
    if (p.rho() >= 1.0) throw UnstableQueue(name, p.rho());
}

double p_zero(const QueueModelParams& p) {
    check_stable(p);
    const double a = p.lambda / p.mu;
    const double rho = p.rho();
    double term = 1.0;  // a^m / m!
    double sum = 0.0;
    for (int m = 0; m < p.servers; ++m) {
        sum += term;
        term *= a / (m + 1);
    }
    // term is now a^c / c!
    return 1.0 / (sum + term / (1.0 - rho));
}

double mean_queue_length(const QueueModelParams& p, LqForm form) {
    const double p0 = p_zero(p);
    const double rho = p.rho();
    const double a = p.lambda / p.mu;
    double num = 1.0;  // a^c / c!  or  rho^(c+1) / c!
    for (int m = 1; m <= p.servers; ++m) num *= (form == LqForm::ErlangC ? a : rho) / m;
    num *= rho;
    return p0 * num / ((1.0 - rho) * (1.0 - rho));
}

double wait_time(const QueueModelParams& p, LqForm form) {
    const double lq = mean_queue_length(p, form);
    return p.lambda > 0.0 ? lq / p.lambda : 0.0;
}

double g_g_correction(const QueueModelParams& p, LqForm form) {
    return wait_time(p, form) * (p.ca2 + p.cs2) / 2.0;
}

EndToEnd end_to_end_estimate(const QueueModelParams& robot, const QueueModelParams& drive, LqForm form) {
    check_stable(robot, "robot");
    check_stable(drive, "drive");
    EndToEnd e;
    e.wait_robot = g_g_correction(robot, form);
    e.wait_drive = g_g_correction(drive, form);
    e.service_robot = 1.0 / robot.mu;
    e.service_drive = 1.0 / drive.mu;
    return e;
}

std::vector<SizingRow> sizing_table(const QueueModelParams& robot, const QueueModelParams& drive,
                                    const std::vector<double>& lambdas, LqForm form) {
    std::vector<SizingRow> rows;
    for (double lambda : lambdas) {
        QueueModelParams r = robot, d = drive;
        r.lambda = d.lambda = lambda;
        SizingRow row;
        row.lambda = lambda;
        row.rho_robot = r.rho();
        row.rho_drive = d.rho();
        row.stable = row.rho_robot < 1.0 && row.rho_drive < 1.0;
        if (row.stable) {
            row.wq_robot = wait_time(r, form);
            row.wq_drive = wait_time(d, form);
            row.gq_robot = g_g_correction(r, form);
            row.gq_drive = g_g_correction(d, form);
            row.end_to_end = end_to_end_estimate(r, d, form).total();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace tapesim
