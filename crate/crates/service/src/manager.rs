use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use story_core::{Archive, ArchiveConfig, DimensionSpec, LevelConstraints, NarrativeGraph};

use crate::docs::Status;
use crate::error::ServiceError;
use crate::session::{state_path, Session, SessionState};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub initial_population: usize,
    /// Parent pairs bred per generation.
    pub offspring_per_generation: usize,
    pub cell_capacity: usize,
    /// Seed of the first session; later sessions add their sequence number.
    pub seed: u64,
    /// Where session state is saved and restored from.
    pub state_dir: Option<PathBuf>,
    /// Generations between periodic saves; 0 disables them.
    pub checkpoint_every: u64,
    /// Minimum spacing of streamed snapshots.
    pub stream_interval: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let archive = ArchiveConfig::default();
        ServiceConfig {
            initial_population: archive.initial_population,
            offspring_per_generation: archive.offspring_per_generation,
            cell_capacity: archive.cell_capacity,
            seed: 0,
            state_dir: None,
            checkpoint_every: 50,
            stream_interval: Duration::from_secs(1),
        }
    }
}

/// Session registry. Each session owns one worker thread.
pub struct SessionManager {
    config: ServiceConfig,
    sessions: RwLock<BTreeMap<String, Arc<Session>>>,
    next: RwLock<u64>,
}

fn session_number(id: &str) -> Option<u64> {
    id.strip_prefix('s')?.parse().ok()
}

impl SessionManager {
    /// Creates the registry, restoring every session saved in the state
    /// directory in its saved status.
    pub fn open(config: ServiceConfig) -> Result<Self, ServiceError> {
        let manager = SessionManager {
            sessions: RwLock::new(BTreeMap::new()),
            next: RwLock::new(0),
            config,
        };
        let Some(dir) = manager.config.state_dir.clone() else {
            return Ok(manager);
        };
        let fail = |path: &std::path::Path, message: String| ServiceError::Persistence {
            path: path.display().to_string(),
            message,
        };
        fs::create_dir_all(&dir).map_err(|e| fail(&dir, e.to_string()))?;
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| fail(&dir, e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".session.json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|e| fail(&path, e.to_string()))?;
            let state: SessionState = serde_json::from_str(&text).map_err(|e| fail(&path, e.to_string()))?;
            manager.register(state);
        }
        Ok(manager)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn register(&self, state: SessionState) -> Arc<Session> {
        if let Some(n) = session_number(&state.id) {
            let mut next = self.next.write().expect("counter lock");
            *next = (*next).max(n + 1);
        }
        let id = state.id.clone();
        let session = Arc::new(Session::spawn(
            state,
            self.config.state_dir.clone(),
            self.config.checkpoint_every,
        ));
        self.sessions.write().expect("registry lock").insert(id, session.clone());
        session
    }

    /// Initializes a new archive (blocking) and starts its worker.
    pub fn create(
        &self,
        target: Option<NarrativeGraph>,
        constraints: Option<LevelConstraints>,
        dims: Option<DimensionSpec>,
    ) -> Arc<Session> {
        let n = {
            let mut next = self.next.write().expect("counter lock");
            let n = *next;
            *next += 1;
            n
        };
        let config = ArchiveConfig {
            dims: dims.unwrap_or_default(),
            cell_capacity: self.config.cell_capacity,
            offspring_per_generation: self.config.offspring_per_generation,
            initial_population: self.config.initial_population,
            constraints,
            seed: self.config.seed.wrapping_add(n),
            ..ArchiveConfig::default()
        };
        let target = target.unwrap_or_else(NarrativeGraph::default_graph);
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let state = SessionState {
            id: format!("s{n}"),
            created,
            status: Status::Running,
            archive: Archive::new(config, target),
        };
        self.register(state)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Session>, ServiceError> {
        self.sessions
            .read()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_owned()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.sessions.read().expect("registry lock").keys().cloned().collect()
    }

    /// Stops a session and deletes its saved state.
    pub fn remove(&self, id: &str) -> Result<(), ServiceError> {
        let session = self
            .sessions
            .write()
            .expect("registry lock")
            .remove(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_owned()))?;
        session.stop();
        if let Some(dir) = &self.config.state_dir {
            let path = state_path(dir, id);
            if path.exists() {
                fs::remove_file(&path).map_err(|e| ServiceError::Persistence {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            }
        }
        Ok(())
    }

    /// Stops every worker; each saves its state first.
    pub fn shutdown(&self) {
        let sessions: Vec<Arc<Session>> = self.sessions.write().expect("registry lock").values().cloned().collect();
        for s in sessions {
            s.stop();
        }
    }
}
