use std::collections::{BTreeMap, BTreeSet};

use crate::apiface::{ApiError, Endpoint, RequestTarget, SocialApi};
use crate::model::{Membership, Subscription, Timestamp, UserId};
use crate::store::Store;

use super::{apply_api_error, Gate, SchedulerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum UserWorker {
    Memberships,
    Ownerships,
    Subscriptions,
}

const USER_WORKERS: [UserWorker; 3] = [UserWorker::Memberships, UserWorker::Ownerships, UserWorker::Subscriptions];

#[derive(Debug, Clone, Default)]
struct UserQueue {
    pos: usize,
    visited: BTreeMap<UserId, Timestamp>,
}

#[derive(Debug, Clone, Default)]
struct MemberProgress {
    list_id: u64,
    cursor: u64,
    members: BTreeSet<UserId>,
}

/// State of the four list workers: three walk the user set, one walks the
/// discovered lists. Each advances by at most one request per turn.
#[derive(Debug, Clone, Default)]
pub struct ListRoundRobin {
    users: [UserQueue; 3],
    lists: BTreeMap<u64, Option<Timestamp>>,
    in_flight: Option<MemberProgress>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ListTurn {
    pub requests: u32,
    pub records: usize,
}

impl ListRoundRobin {
    pub fn new() -> ListRoundRobin {
        ListRoundRobin::default()
    }

    /// Lists known to the members worker.
    pub fn known_lists(&self) -> usize {
        self.lists.len()
    }

    fn discover(&mut self, list_id: u64) {
        self.lists.entry(list_id).or_insert(None);
    }

    fn next_user(&mut self, w: usize, users: &[UserId], now: Timestamp, window: i64) -> Option<UserId> {
        let q = &mut self.users[w];
        for k in 0..users.len() {
            let i = (q.pos + k) % users.len();
            let u = users[i];
            if q.visited.get(&u).is_none_or(|&t| now - t >= window) {
                q.pos = (i + 1) % users.len();
                return Some(u);
            }
        }
        None
    }

    fn next_list(&self, now: Timestamp, window: i64) -> Option<u64> {
        self.lists
            .iter()
            .find(|(_, last)| last.is_none_or(|t| now - t >= window))
            .map(|(id, _)| *id)
    }
}

/// One round-robin turn over `users`: the members worker steps first, then
/// the memberships, ownerships and subscriptions workers. Returns what the
/// turn did; a turn with zero requests means every worker is idle or out
/// of permits.
pub fn crawl_lists<A: SocialApi + ?Sized>(
    rr: &mut ListRoundRobin,
    api: &A,
    gate: &mut Gate,
    store: &Store,
    cfg: &SchedulerConfig,
    users: &[UserId],
) -> ListTurn {
    let now = api.now();
    let window = cfg.list_revisit_window;
    let mut turn = ListTurn::default();

    if gate.remaining(Endpoint::ListsMembers, now) > 0 {
        let progress = rr.in_flight.take().or_else(|| {
            rr.next_list(now, window).map(|list_id| MemberProgress { list_id, ..MemberProgress::default() })
        });
        if let Some(mut p) = progress {
            let list_id = p.list_id;
            match gate.call(api, Endpoint::ListsMembers, RequestTarget::List(list_id), |a| a.lists_members(list_id, p.cursor)) {
                Ok(page) => {
                    turn.requests += 1;
                    p.members.extend(page.ids);
                    match page.next {
                        Some(c) => {
                            p.cursor = c;
                            rr.in_flight = Some(p);
                        }
                        None => {
                            turn.records += p.members.len();
                            store.replace_members(list_id, &p.members);
                            rr.lists.insert(list_id, Some(now));
                        }
                    }
                }
                Err(ApiError::RateLimited { .. }) => rr.in_flight = Some(p),
                Err(_) => {
                    turn.requests += 1;
                    rr.lists.insert(list_id, Some(now));
                }
            }
        }
    }

    for (w, worker) in USER_WORKERS.into_iter().enumerate() {
        let endpoint = match worker {
            UserWorker::Memberships => Endpoint::ListsMemberships,
            UserWorker::Ownerships => Endpoint::ListsOwnerships,
            UserWorker::Subscriptions => Endpoint::ListsSubscriptions,
        };
        if users.is_empty() || gate.remaining(endpoint, now) == 0 {
            continue;
        }
        let Some(u) = rr.next_user(w, users, now, window) else { continue };
        let r = gate.call(api, endpoint, RequestTarget::User(u), |a| match worker {
            UserWorker::Memberships => a.lists_memberships(u),
            UserWorker::Ownerships => a.lists_ownerships(u),
            UserWorker::Subscriptions => a.lists_subscriptions(u),
        });
        match r {
            Ok(records) => {
                turn.requests += 1;
                rr.users[w].visited.insert(u, now);
                for rec in records {
                    rr.discover(rec.list_id);
                    turn.records += 1;
                    let list_id = rec.list_id;
                    store.put_list(rec);
                    match worker {
                        UserWorker::Memberships => {
                            store.add_membership(Membership { list_id, member: u });
                        }
                        UserWorker::Subscriptions => {
                            store.add_subscription(Subscription { list_id, subscriber: u });
                        }
                        UserWorker::Ownerships => {}
                    }
                }
            }
            Err(ApiError::RateLimited { .. }) => {}
            Err(e) => {
                turn.requests += 1;
                rr.users[w].visited.insert(u, now);
                apply_api_error(store, u, &e, now);
            }
        }
    }
    turn
}
