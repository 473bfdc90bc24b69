//! Fixed-window rate limiting and the request log audit.

use commcrawl::apiface::{audit_request_log, BudgetConfig, Endpoint, Permit, RateLimiter, RequestRecord, RequestTarget};
use commcrawl::model::UserId;

fn main() {
    let budgets = BudgetConfig::default().with(Endpoint::UserTimeline, 3);
    let limiter = RateLimiter::new(budgets.clone());
    let mut log = Vec::new();
    for t in [0, 10, 20, 30, 900] {
        let p = limiter.acquire(Endpoint::UserTimeline, t);
        println!("t={t:>4} {p:?}");
        if p == Permit::Granted {
            log.push(RequestRecord { endpoint: Endpoint::UserTimeline, target: RequestTarget::User(UserId(1)), at: t, outcome: "ok".into() });
        }
    }
    println!("violations in limiter log: {}", audit_request_log(&log, &budgets).len());
    log.push(RequestRecord { endpoint: Endpoint::UserTimeline, target: RequestTarget::User(UserId(1)), at: 40, outcome: "ok".into() });
    println!("violations after a forged request: {:?}", audit_request_log(&log, &budgets));
}
