# Report service, scenario runner and report rendering
