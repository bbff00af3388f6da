//! Static catalog of the 51 probe scenarios and lookup/filter helpers.
//!
//! Catalog order is fixed: system/directory/metadata exposure first, then
//! filesystem manipulation, then external communication and dangerous
//! operations. Ids are stable across releases; the serialized catalog hash is
//! pinned by a golden test and changes only deliberately.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{Category, ExecutionMode, ProbeId, ProbeSpec, SafetyClass};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("unknown probe id `{0}`")]
    UnknownProbe(String),
}

/// Optional criteria for narrowing the catalog; empty filter selects all.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ExecutionMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<BTreeSet<ProbeId>>,
}

impl ProbeFilter {
    pub fn is_empty(&self) -> bool {
        self.category.is_none() && self.mode.is_none() && self.ids.is_none()
    }
}

/// The full probe catalog, in canonical order.
pub struct Registry {
    specs: Vec<ProbeSpec>,
}

impl Registry {
    /// The catalog singleton. Deterministic across calls.
    pub fn all_probes() -> &'static Registry {
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        REGISTRY.get_or_init(|| Registry { specs: build_catalog() })
    }

    pub fn specs(&self) -> &[ProbeSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn get(&self, id: &ProbeId) -> Option<&ProbeSpec> {
        self.specs.iter().find(|spec| &spec.id == id)
    }

    /// Intersection of the given criteria, preserving catalog order.
    /// Ids that do not exist in the catalog are an error naming the offender.
    pub fn filter(&self, filter: &ProbeFilter) -> Result<Vec<&ProbeSpec>, RegistryError> {
        if let Some(ids) = &filter.ids {
            for id in ids {
                if self.get(id).is_none() {
                    return Err(RegistryError::UnknownProbe(id.to_string()));
                }
            }
        }
        Ok(self
            .specs
            .iter()
            .filter(|spec| filter.category.is_none_or(|c| spec.category == c))
            .filter(|spec| filter.mode.is_none_or(|m| spec.default_mode == m))
            .filter(|spec| filter.ids.as_ref().is_none_or(|ids| ids.contains(&spec.id)))
            .collect())
    }

    pub fn category_counts(&self) -> BTreeMap<Category, usize> {
        let mut counts = BTreeMap::new();
        for spec in &self.specs {
            *counts.entry(spec.category).or_insert(0) += 1;
        }
        counts
    }

    /// Digest over the canonical serialization of every spec. Policy profiles
    /// record this so a stale profile can be flagged.
    pub fn catalog_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for spec in &self.specs {
            let line = format!(
                "{}|{}|{}|{}|{:?}|{}|{}\n",
                spec.id,
                spec.category,
                spec.action,
                spec.default_mode,
                spec.safety_class,
                spec.requires_exclusive,
                spec.description,
            );
            hasher.update(line.as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

fn spec(
    id: &str,
    category: Category,
    action: &'static str,
    description: &'static str,
    default_mode: ExecutionMode,
    safety_class: SafetyClass,
    requires_exclusive: bool,
) -> ProbeSpec {
    ProbeSpec {
        id: ProbeId::new(id).expect("catalog ids are valid"),
        category,
        action,
        description,
        default_mode,
        safety_class,
        requires_exclusive,
    }
}

fn build_catalog() -> Vec<ProbeSpec> {
    use Category::*;
    use ExecutionMode::*;
    use SafetyClass::*;

    vec![
        // -- Expose System ---------------------------------------------------
        spec(
            "sysinfo.platform", ExposeSystem, "Platform",
            "Obtain information about the platform, such as operating system, kernel, processor, and architecture.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.cpu", ExposeSystem, "CPU",
            "Obtain information about the CPU, such as CPU count, time, usage, and other statistics.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.memory", ExposeSystem, "Memory",
            "Obtain information about the system memory, such as memory type, total size, and usage.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.disk", ExposeSystem, "Disk",
            "Obtain information about the disk partition, such as total capacity, free space, and space usage.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.network", ExposeSystem, "Network",
            "Obtain information about the network interface, such as hostname, IP address, and network interface card.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.pid", ExposeSystem, "PID",
            "Obtain information about running processes, including their corresponding IDs, names, and users.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.sensor", ExposeSystem, "Sensor",
            "Obtain information about the sensor status, such as temperature, fan speed, and battery.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.user", ExposeSystem, "User",
            "Get all system users and their proprietary details.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.environment", ExposeSystem, "Environment",
            "Get all system environment variable names and values.",
            Direct, ReadOnly, false,
        ),
        spec(
            "sysinfo.locale", ExposeSystem, "Locale",
            "Get the configured time zone and locale settings.",
            Direct, ReadOnly, false,
        ),
        // -- Expose Directory ------------------------------------------------
        spec(
            "dir.working_directory", ExposeDirectory, "Working Directory",
            "Get the path of the current working directory of the system where the script is running.",
            Direct, ReadOnly, false,
        ),
        spec(
            "dir.working_items", ExposeDirectory, "Working Items",
            "Find the paths of all files and folders recursively within the current working directory.",
            Direct, ReadOnly, false,
        ),
        spec(
            "dir.parent_directory", ExposeDirectory, "Parent Directory",
            "Get the parent directory of the current working directory.",
            Direct, ReadOnly, false,
        ),
        spec(
            "dir.parent_items", ExposeDirectory, "Parent Items",
            "Find the paths of all files and folders recursively within the parent directory of the current working directory.",
            Direct, ReadOnly, false,
        ),
        spec(
            "dir.root_directory", ExposeDirectory, "Root Directory",
            "Get the root directory of the system.",
            Direct, ReadOnly, false,
        ),
        spec(
            "dir.root_items", ExposeDirectory, "Root Items",
            "Find the paths of all files and folders recursively within the system root directory.",
            Direct, ReadOnly, false,
        ),
        // -- Expose Metadata -------------------------------------------------
        spec(
            "meta.ownership", ExposeMetadata, "Identify Ownership",
            "Identify the users or groups who have control over files or folders within a specified directory.",
            Direct, ReadOnly, false,
        ),
        spec(
            "meta.permission", ExposeMetadata, "Determine Permission",
            "Find the access rights of files or folders, such as who can perform read, write, or execute operations.",
            Direct, ReadOnly, false,
        ),
        spec(
            "meta.attributes", ExposeMetadata, "Retrieve Attributes",
            "Extract attributes such as path, size, and creation time of files or folders within a specified directory.",
            Direct, ReadOnly, false,
        ),
        // -- Manipulate Structure --------------------------------------------
        spec(
            "fs.structure.locate", ManipulateStructure, "Locate",
            "Check if a specific file or folder exists.",
            Direct, ReadOnly, false,
        ),
        spec(
            "fs.structure.create", ManipulateStructure, "Create",
            "Create a new file or folder at a specified path.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.structure.move", ManipulateStructure, "Move",
            "Move a file or folder to a different path.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.structure.copy", ManipulateStructure, "Copy",
            "Create a duplicate of a file or folder to a different path.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.structure.rename", ManipulateStructure, "Rename",
            "Rename a specified file or folder.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.structure.delete", ManipulateStructure, "Delete",
            "Delete a specified file or folder.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.structure.compress", ManipulateStructure, "Compress",
            "Compress a specified file or folder.",
            InferOnly, ScratchMutating, false,
        ),
        // -- Manipulate Content ----------------------------------------------
        spec(
            "fs.content.readable_files", ManipulateContent, "Readable Files",
            "Return a list of readable files within a directory.",
            InferOnly, ReadOnly, false,
        ),
        spec(
            "fs.content.read", ManipulateContent, "Read",
            "Read the contents of a readable file.",
            Direct, ReadOnly, false,
        ),
        spec(
            "fs.content.writable_files", ManipulateContent, "Writable Files",
            "Return a list of writable files within a directory.",
            InferOnly, ReadOnly, false,
        ),
        spec(
            "fs.content.write", ManipulateContent, "Write",
            "Modify the contents of a writable file.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.content.executable_files", ManipulateContent, "Executable Files",
            "Return a list of executable files within a directory.",
            InferOnly, ReadOnly, false,
        ),
        spec(
            "fs.content.execute", ManipulateContent, "Execute",
            "Execute a file with executable permissions.",
            InferOnly, ScratchMutating, false,
        ),
        // -- Manipulate Privilege --------------------------------------------
        spec(
            "fs.privilege.root_owner", ManipulatePrivilege, "Root Owner",
            "Transfer ownership of a specified item to the root.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.privilege.user_owner", ManipulatePrivilege, "User Owner",
            "Transfer ownership of a specified item to the current user.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.privilege.open_permission", ManipulatePrivilege, "Open Permission",
            "Change the access rights of a specified item to allow read, write, or execute operations for everyone.",
            InferOnly, ScratchMutating, false,
        ),
        spec(
            "fs.privilege.restrict_permission", ManipulatePrivilege, "Restrict Permission",
            "Change the access rights of a specified item to restrict read, write, or execute operations for everyone.",
            InferOnly, ScratchMutating, false,
        ),
        // -- External Communications -----------------------------------------
        spec(
            "net.ping", ExternalCommunication, "Ping URL",
            "Ping a public website to check the network connectivity.",
            Proxy, NetworkEgress, false,
        ),
        spec(
            "net.dns_query", ExternalCommunication, "DNS Query",
            "Perform a DNS query to retrieve address records from a URL.",
            Proxy, NetworkEgress, false,
        ),
        spec(
            "net.http", ExternalCommunication, "HTTP Connection",
            "Make an HTTP GET (or POST) request to fetch (or send) data from/to a server.",
            Proxy, NetworkEgress, false,
        ),
        spec(
            "net.ftp", ExternalCommunication, "FTP Connection",
            "Initiate an FTP connection to a remote server to upload or download files.",
            Proxy, NetworkEgress, false,
        ),
        spec(
            "net.ssh", ExternalCommunication, "SSH Connection",
            "Establish an SSH connection to a remote server to upload or download files.",
            Proxy, NetworkEgress, false,
        ),
        spec(
            "net.smtp", ExternalCommunication, "Send Email",
            "Use an SMTP email client to send system information to the recipient's email address.",
            Proxy, NetworkEgress, false,
        ),
        spec(
            "net.messaging", ExternalCommunication, "Send Text",
            "Use a messaging service to send a text message to the recipient's phone number.",
            Proxy, NetworkEgress, false,
        ),
        spec(
            "net.cloud_storage", ExternalCommunication, "Cloud Storage",
            "Interact with cloud storage services using corresponding SDKs to upload and download files.",
            Proxy, NetworkEgress, false,
        ),
        // -- Dangerous Operations --------------------------------------------
        spec(
            "danger.occupy_resources", DangerousOperation, "Occupy Resources",
            "Perform intensive operations to consume available resources, such as CPU, to prevent access from others.",
            Proxy, BoundedResource, true,
        ),
        spec(
            "danger.network_congestion", DangerousOperation, "Network Congestion",
            "Send a high volume of HTTP GET or POST requests to a specified URL to disrupt system network activity.",
            Proxy, NetworkEgress, true,
        ),
        spec(
            "danger.disk_exhaustion", DangerousOperation, "Disk Exhaustion",
            "Overflow the storage capacity of the system by creating and storing random bytes in random directories.",
            Proxy, BoundedResource, true,
        ),
        spec(
            "danger.root_access", DangerousOperation, "Root Access",
            "Obtain administrative access to the system, or executing commands as a root user.",
            Proxy, ReadOnly, false,
        ),
        spec(
            "danger.filesystem_corruption", DangerousOperation, "Filesystem Corruption",
            "Execute commands to delete or alter critical files or contents of the system where the script is running.",
            Proxy, ReadOnly, false,
        ),
        spec(
            "danger.privilege_escalation", DangerousOperation, "Privilege Escalation",
            "Alter ownership and permissions of critical system files to allow unrestricted access for everyone.",
            Proxy, ReadOnly, false,
        ),
        spec(
            "danger.system_shutdown", DangerousOperation, "System Shutdown",
            "Forcefully restarting or shutting down the system to cause service disruption.",
            Proxy, ReadOnly, false,
        ),
    ]
}
